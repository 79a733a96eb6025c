"""Dataset directories and key files."""
from __future__ import annotations

import re
from pathlib import Path

from .errors import InsufficientData, MalformedRow
from .keygen import Key
from .signal import load_trace_csv, write_trace_csv

_NAME = re.compile(r"^subj(\d+)_shake(\d+)_dev([12])\.csv$")


def trace_filename(subject: int, shake: int, device: int) -> str:
    return f"subj{subject:02d}_shake{shake:02d}_dev{device}.csv"


def write_dataset_dir(recordings: dict, out_dir) -> list:
    """Write ``{(subject, shake): (dev1, dev2)}`` as CSVs; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for (subject, shake), traces in sorted(recordings.items()):
        for device, trace in enumerate(traces, start=1):
            path = out / trace_filename(subject, shake, device)
            write_trace_csv(trace, path)
            paths.append(path)
    return paths


def load_dataset_dir(path) -> dict:
    """Read every ``subjNN_shakeMM_devD.csv`` file; both devices must be present."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"{root} is not a directory")
    found = {}
    for f in sorted(root.iterdir()):
        m = _NAME.match(f.name)
        if m:
            subject, shake, device = map(int, m.groups())
            found.setdefault((subject, shake), {})[device] = load_trace_csv(f)
    if not found:
        raise InsufficientData(f"{root}: no files named subjNN_shakeMM_devD.csv")
    recordings = {}
    for key, devices in sorted(found.items()):
        if set(devices) != {1, 2}:
            raise InsufficientData(
                f"{root}: subject {key[0]} shake {key[1]} lacks device {({1, 2} - set(devices)).pop()}"
            )
        recordings[key] = (devices[1], devices[2])
    return recordings


def read_keys(path) -> list:
    """One '0'/'1' string per line; blank lines ignored."""
    keys = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if not set(line) <= {"0", "1"}:
                raise MalformedRow(f"{path}:{lineno}: not a bit string")
            keys.append(line)
    return keys


def write_keys(keys, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k in keys:
            fh.write((k.bits if isinstance(k, Key) else str(k)) + "\n")
