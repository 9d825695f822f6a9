"""Run configuration, deterministic output files, and hashed manifests.

All file formats carry a version header line. CSV bodies are byte-identical
across runs with the same config and seed: floats print as %.17g and no
timestamps enter the tables (wall-clock lives only in the manifest).
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

CSV_FORMAT = "liyau-csv v1"
MANIFEST_FORMAT = "liyau-manifest v1"
ARTIFACT_VERSION = "0.1.0"

OUTDIR_ENV = "LIYAU_OUTDIR"


class ConfigError(ValueError):
    """Bad flags, unknown keys, or malformed config files (usage errors)."""


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    outdir: Path
    seed: int = 0

    @classmethod
    def assemble(cls, subcommand: str, file_params: dict, flag_params: dict,
                 known_keys: set, outdir=None, seed: int = 0) -> "RunConfig":
        """Merge config-file values under flag overrides; reject unknown keys."""
        unknown = set(file_params) - known_keys
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        params = dict(file_params)
        # flags override the file; None means the flag was not given
        params.update({k: v for k, v in flag_params.items() if v is not None})
        return cls(subcommand=subcommand, params=params,
                   outdir=resolve_outdir(outdir), seed=seed)


def resolve_outdir(flag_value=None) -> Path:
    out = flag_value or os.environ.get(OUTDIR_ENV) or "."
    return Path(out)


def read_config_file(path) -> dict:
    """key=value lines; # starts a comment; values stay strings."""
    params = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        params[k.strip()] = v.strip()
    return params


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(path, header, rows, comment: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {CSV_FORMAT}"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json_report(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def sha256_of(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


@dataclass
class RunManifest:
    """End-of-run record: config echo, verdicts, and hashed file inventory."""

    config: dict
    verdicts: dict = dc_field(default_factory=dict)
    files: dict = dc_field(default_factory=dict)
    started: float = dc_field(default_factory=time.time)

    def register(self, path) -> Path:
        path = Path(path)
        self.files[path.name] = sha256_of(path)
        return path

    def write(self, outdir) -> Path:
        """Atomic write (tmp + rename) so no partial manifest survives a crash."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        payload = {
            "format": MANIFEST_FORMAT,
            "artifact_version": ARTIFACT_VERSION,
            "config": self.config,
            "verdicts": self.verdicts,
            "files": self.files,
            "wall_clock_s": time.time() - self.started,
        }
        target = outdir / "manifest.json"
        tmp = outdir / ".manifest.json.tmp"
        tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, target)
        return target
