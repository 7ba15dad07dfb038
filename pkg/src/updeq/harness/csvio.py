"""CSV emission: header row, data rows, and a trailing metadata comment
`# config_hash=<hex> seed=<n> version=<semver>` so outputs are
self-identifying and byte-reproducible."""

from __future__ import annotations

import hashlib

from .. import __version__


def config_hash(config: dict) -> str:
    text = "\n".join(f"{k}={config[k]}" for k in sorted(config))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def metadata_line(config: dict, seed: int) -> str:
    return f"# config_hash={config_hash(config)} seed={seed} version={__version__}"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header: str, rows, config: dict, seed: int) -> None:
    lines = [header]
    for row in rows:
        if isinstance(row, str):
            lines.append(row)
        else:
            lines.append(",".join(fmt(x) for x in row))
    lines.append(metadata_line(config, seed))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
