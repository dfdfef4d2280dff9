"""Loading and validating exported plot bundles.

A bundle is the directory `plasmawave export-plotdata` writes: three CSVs
with fixed headers plus an annotations key=value file.  Headers are checked
exactly; a mismatch raises with an explicit expected-vs-found diff so stale
exports fail loudly instead of mis-plotting.

Figures never recompute physics: every annotated number (fitted slopes,
delta, detector times) comes out of the annotations file the solver wrote.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

DECAY_HEADER = "t,sup_abs_h,max_grad_n"
SPECTRUM_HEADER = "xi,abs_spectrum"
CONVERGENCE_HEADER = "t,d_corrected,d_control,band_corrected,band_control"


class SchemaError(ValueError):
    pass


def _read_csv(path: Path, expect_header: str) -> np.ndarray:
    if not path.exists():
        raise SchemaError(f"missing input: {path}")
    with open(path) as fh:
        header = fh.readline().strip()
        if header != expect_header:
            raise SchemaError(
                f"header mismatch in {path.name}:\n"
                f"  expected: {expect_header}\n"
                f"  found:    {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data


def _read_annotations(path: Path) -> dict:
    out = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                out[k.strip()] = v.strip()
    return out


@dataclass
class PlotBundle:
    """One run's exported curves plus its report annotations."""

    root: Path
    decay: np.ndarray                      # columns: t, sup|h|, max|dn/dx|
    spectrum: Optional[np.ndarray]         # columns: xi, |spectrum|
    convergence: Optional[np.ndarray]      # columns: t, D_corr, D_ctrl, band pair
    annotations: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.root.name

    def annotation_float(self, key: str) -> Optional[float]:
        if key in self.annotations:
            return float(self.annotations[key])
        return None


def load_bundle(root) -> PlotBundle:
    root = Path(root)
    decay = _read_csv(root / "decay_curve.csv", DECAY_HEADER)
    spec_p = root / "spectrum_snapshot.csv"
    spectrum = _read_csv(spec_p, SPECTRUM_HEADER) if spec_p.exists() else None
    conv_p = root / "scattering_convergence.csv"
    convergence = _read_csv(conv_p, CONVERGENCE_HEADER) if conv_p.exists() else None
    return PlotBundle(root, decay, spectrum, convergence,
                      _read_annotations(root / "annotations.txt"))
