import dataclasses

from diwbench.sensor import SensorSpec


def spec_with(kind, **materials):
    base = SensorSpec.default(kind)
    return dataclasses.replace(base, materials=dataclasses.replace(base.materials, **materials))
