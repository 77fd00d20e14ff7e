"""Run configuration files: INI-style text that mirrors the CLI flags.

A run file has a [run] section naming the subcommand and an [args] section
with one key per flag (dest names, underscores). Values stay strings at this
layer; the CLI converts them with the same converters as the flags, and
explicit flags override file values. The text form round-trips losslessly.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .models import ConfigurationError


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    args: dict = field(default_factory=dict)  # flag dest -> string value

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        cp["run"] = {"subcommand": self.subcommand}
        cp["args"] = {k: str(v) for k, v in sorted(self.args.items())}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"bad run config: {exc}") from exc
        if "run" not in cp or "subcommand" not in cp["run"]:
            raise ConfigurationError("run config needs [run] subcommand = ...")
        args = dict(cp["args"]) if "args" in cp else {}
        return cls(subcommand=cp["run"]["subcommand"].strip(), args=args)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())
