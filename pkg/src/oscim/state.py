"""Plain state containers shared by the circuit and dynamics modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OscillatorState:
    """Signal and pump envelope amplitudes (volts) at time ``t`` (seconds)."""

    A_s: np.ndarray
    A_p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.A_s = np.asarray(self.A_s, dtype=float)
        self.A_p = np.asarray(self.A_p, dtype=float)
        if self.A_s.shape != self.A_p.shape or self.A_s.ndim != 1:
            raise ValueError("A_s and A_p must be 1-D arrays of equal length")

    @property
    def n(self) -> int:
        return self.A_s.shape[0]

    def pack(self) -> np.ndarray:
        return np.concatenate([self.A_s, self.A_p])

    @classmethod
    def unpack(cls, y, t: float = 0.0) -> "OscillatorState":
        y = np.asarray(y, dtype=float)
        n = y.shape[0] // 2
        return cls(y[:n].copy(), y[n:].copy(), t)


@dataclass
class AlgorithmState:
    """Continuous spins ``x`` and multipliers ``lam`` of the multiplier flow."""

    x: np.ndarray
    lam: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        if self.x.shape != self.lam.shape or self.x.ndim != 1:
            raise ValueError("x and lam must be 1-D arrays of equal length")

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.lam])

    @classmethod
    def unpack(cls, y, t: float = 0.0) -> "AlgorithmState":
        y = np.asarray(y, dtype=float)
        n = y.shape[0] // 2
        return cls(y[:n].copy(), y[n:].copy(), t)


@dataclass
class SingleOscState:
    """Cosine (A_s) and sine (B_s) signal quadratures plus the pump envelope."""

    A_s: float
    B_s: float
    A_p: float

    def pack(self) -> np.ndarray:
        return np.array([self.A_s, self.B_s, self.A_p], dtype=float)
