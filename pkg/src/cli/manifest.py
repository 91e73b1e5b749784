import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

from .. import __version__
from .output import write_json


@dataclass
class RunManifest:
    """What a CLI run read, which tolerances it used, how long each stage took and what it wrote."""
    subcommand: str
    config_path: str = ""
    tolerances: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    version: str = __version__

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + max(0.0, time.perf_counter() - t0)

    def add_output(self, path):
        if path not in self.outputs:
            self.outputs.append(path)
        return path

    def write(self, path):
        self.add_output(path)
        return write_json(path, asdict(self))
