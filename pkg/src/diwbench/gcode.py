"""The G-code dialect shared by the toolpath compiler and the virtual printer.

Only ``G90 M83 G92 G0 G1 G28`` are understood. Numbers are written with at
most five fractional digits and always carry a decimal point, so
``emit(parse(emit(p))) == emit(p)`` for every program.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import MalformedParameter, UnknownCommand

FRACTION_DIGITS = 5

# letters accepted per command; True means a value is mandatory
DIALECT: dict[str, dict[str, bool]] = {
    "G0": {"X": True, "Y": True, "Z": True, "E": True, "F": True},
    "G1": {"X": True, "Y": True, "Z": True, "E": True, "F": True},
    "G28": {"X": False, "Y": False, "Z": False},
    "G90": {},
    "G92": {"X": True, "Y": True, "Z": True, "E": True},
    "M83": {},
}

_CODE_RE = re.compile(r"^([GM])(\d+)$")
_NUMBER_RE = re.compile(r"^[-+]?(\d+(\.\d*)?|\.\d+)$")


def format_number(value: float) -> str:
    text = f"{value:.{FRACTION_DIGITS}f}".rstrip("0")
    if text.endswith("."):
        text += "0"
    if text == "-0.0":
        text = "0.0"
    return text


@dataclass(frozen=True)
class Command:
    """One program line. ``code`` is None for comment-only and blank lines."""

    code: str | None
    params: tuple[tuple[str, float | None], ...] = ()
    comment: str | None = None
    line: int = 0

    def get(self, letter: str, default=None):
        for key, value in self.params:
            if key == letter:
                return value
        return default

    def has(self, letter: str) -> bool:
        return any(key == letter for key, _ in self.params)

    @property
    def is_motion(self) -> bool:
        return self.code in ("G0", "G1")

    def to_text(self) -> str:
        parts = []
        if self.code is not None:
            parts.append(self.code)
            for key, value in self.params:
                parts.append(key if value is None else key + format_number(value))
        text = " ".join(parts)
        if self.comment is not None:
            text = f"{text} ;{self.comment}" if text else f";{self.comment}"
        return text


@dataclass
class GCodeProgram:
    commands: list[Command] = field(default_factory=list)

    def __iter__(self) -> Iterator[Command]:
        return iter(self.commands)

    def __len__(self) -> int:
        return len(self.commands)

    def comment(self, text: str) -> None:
        self.commands.append(Command(None, comment=text))

    def add(self, code: str, comment: str | None = None, **params: float | None) -> None:
        allowed = DIALECT[code]
        items = []
        for key in "XYZEF":
            if key in params:
                if key not in allowed:
                    raise ValueError(f"{code} does not take {key}")
                items.append((key, None if params[key] is None else float(params[key])))
        self.commands.append(Command(code, tuple(items), comment))

    def extend(self, commands: Iterable[Command]) -> None:
        self.commands.extend(commands)

    @property
    def header(self) -> list[str]:
        """Leading comment lines."""
        out = []
        for cmd in self.commands:
            if cmd.code is not None:
                break
            if cmd.comment is not None:
                out.append(cmd.comment)
        return out

    def emit(self) -> str:
        return emit(self)


def emit(program: GCodeProgram) -> str:
    lines = [cmd.to_text() for cmd in program.commands]
    return "\n".join(lines) + "\n" if lines else ""


def _parse_word(token: str, code: str, lineno: int) -> tuple[str, float | None]:
    letter, rest = token[0], token[1:]
    allowed = DIALECT[code]
    if letter not in allowed:
        raise MalformedParameter(lineno, f"{code} does not accept parameter {token!r}")
    if rest == "":
        if allowed[letter]:
            raise MalformedParameter(lineno, f"parameter {letter} needs a value")
        return letter, None
    if not _NUMBER_RE.match(rest):
        raise MalformedParameter(lineno, f"bad number in {token!r}")
    return letter, float(rest)


def parse(text: str) -> GCodeProgram:
    """Parse G-code text into a typed program, keeping order and comments."""
    program = GCodeProgram()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code_part, sep, comment = raw.partition(";")
        comment = comment if sep else None
        tokens = code_part.upper().split()
        if not tokens:
            program.commands.append(Command(None, comment=comment, line=lineno))
            continue
        m = _CODE_RE.match(tokens[0])
        code = f"{m.group(1)}{int(m.group(2))}" if m else tokens[0]
        if code not in DIALECT:
            raise UnknownCommand(lineno, f"unknown command {tokens[0]!r}")
        params = []
        seen = set()
        for token in tokens[1:]:
            letter, value = _parse_word(token, code, lineno)
            if letter in seen:
                raise MalformedParameter(lineno, f"parameter {letter} given twice")
            seen.add(letter)
            params.append((letter, value))
        program.commands.append(Command(code, tuple(params), comment, lineno))
    return program
