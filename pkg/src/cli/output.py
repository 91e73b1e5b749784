import csv
import json
import os

import numpy as np


def fmt(value):
    """Shortest round-trip text for floats; lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(filename, fieldnames, data):
    os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
    with open(filename, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for row in data:
            w.writerow({k: fmt(row[k]) for k in fieldnames})
    return filename


def write_json(filename, payload):
    os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
    with open(filename, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return filename
