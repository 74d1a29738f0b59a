"""Canonical JSON emission: sorted keys, indent 1, LF newlines.

Floats are written in shortest round-trip form, so every number reloads
bit-exactly and equal inputs always serialize to equal bytes.
"""

import json

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def canonical_dumps(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=1, allow_nan=False)


def write_canonical(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(canonical_dumps(obj))
        fh.write("\n")
