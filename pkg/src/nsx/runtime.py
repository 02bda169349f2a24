"""FFT entry points and thread-count policy.

All transforms in the package go through this module so the worker count is
controlled in one place. NSX_THREADS caps the FFT worker pool (and the sweep
pool in the experiment layer); NSX_THREADS=1 is the bit-reproducible serial
mode. pocketfft computes independent 1-d transforms per line, so results do
not depend on the worker count, but serial mode keeps the guarantee trivial.
"""

import os

import numpy as np
import scipy.fft as _fft


def get_workers() -> int:
    env = os.environ.get("NSX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def fftn(a: np.ndarray) -> np.ndarray:
    return _fft.fftn(a, workers=get_workers())


def ifftn(a: np.ndarray) -> np.ndarray:
    return _fft.ifftn(a, workers=get_workers())


def rfftn(a: np.ndarray) -> np.ndarray:
    return _fft.rfftn(a, workers=get_workers())


def irfftn(a: np.ndarray, shape) -> np.ndarray:
    return _fft.irfftn(a, s=shape, workers=get_workers())
