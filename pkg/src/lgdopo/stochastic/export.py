"""Raw quadrature-series export: little-endian f64 frames plus a JSON sidecar.

Each frame is ``[traj_index, t, Re X_1, Im X_1, Re X_2, Im X_2, ...]`` with
one X per selector, in selector order.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FRAME_DTYPE = "<f8"


class RawSeriesWriter:
    """Streaming writer usable as a ``run_ensemble`` sink."""

    def __init__(self, path, sample_dt: float, meta: dict | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.sample_dt = sample_dt
        self.meta = dict(meta or {})
        self.n_frames = 0
        self.columns = None
        self._fh = open(self.path, "wb")

    def __call__(self, selectors, indices, samples):
        n, m, k = samples.shape
        if self.columns is None:
            self.columns = ["traj_index", "t"]
            for s in selectors:
                self.columns += [f"re:{s.name}", f"im:{s.name}"]
        frames = np.empty((n, m, 2 + 2 * k), dtype=FRAME_DTYPE)
        frames[:, :, 0] = np.asarray(indices, float)[:, None]
        frames[:, :, 1] = self.sample_dt * np.arange(1, m + 1)
        frames[:, :, 2::2] = samples.real
        frames[:, :, 3::2] = samples.imag
        self._fh.write(frames.tobytes())
        self.n_frames += n * m

    def close(self) -> Path:
        self._fh.close()
        sidecar = {
            "format": "little-endian float64 frames",
            "dtype": FRAME_DTYPE,
            "frame_length": len(self.columns or []),
            "columns": self.columns or [],
            "n_frames": self.n_frames,
            "sample_dt": self.sample_dt,
            **self.meta,
        }
        side = self.path.with_suffix(self.path.suffix + ".json")
        side.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        return side


def read_raw_series(path):
    """Return ``(frames, sidecar)`` with frames shaped (n_frames, frame_length)."""
    path = Path(path)
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    data = np.fromfile(path, dtype=side["dtype"])
    return data.reshape(-1, side["frame_length"]), side
