"""Output management: deterministic CSV/JSON writers, checksums, the run
lock, and the manifest (written exactly once, last)."""

from __future__ import annotations

import hashlib
import json
import os
import subprocess
from contextlib import contextmanager
from pathlib import Path

MANIFEST_NAME = "manifest.json"
LOCK_NAME = ".nlslab.lock"


def fmt17(value) -> str:
    """Floats at 17 significant digits; everything else via str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float,)):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt17(v) for v in row) + "\n")


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def source_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True,
            text=True,
            timeout=10,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


@contextmanager
def output_lock(out_dir: Path):
    """Exclusive ownership of an output directory for the run's duration."""
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise RuntimeError(
            f"output directory {out_dir} is locked by another run "
            f"(stale lock? remove {lock})"
        )
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def write_manifest(
    out_dir: Path,
    config_echo_text: str,
    seeds: list[int],
    wall_clock_seconds: float,
    measured: dict,
) -> Path:
    """Checksums every other file in out_dir and writes the manifest last."""
    outputs = {}
    for p in sorted(out_dir.iterdir()):
        if p.name in (MANIFEST_NAME, LOCK_NAME) or p.is_dir():
            continue
        outputs[p.name] = sha256_of(p)
    payload = {
        "config_echo": config_echo_text,
        "source_revision": source_revision(),
        "seeds": seeds,
        "wall_clock_seconds": wall_clock_seconds,
        "outputs": outputs,
        "measured": measured,
    }
    path = out_dir / MANIFEST_NAME
    write_json(path, payload)
    return path
