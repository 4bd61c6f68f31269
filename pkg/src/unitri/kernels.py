"""Backend selection for the per-draw kernels.

The compiled extension ``unitri._ckernels`` is used when it imports; the
numpy implementation in ``unitri._kernels_py`` is the fallback.  Two kernels,
``right`` and ``isosceles``, stay on numpy even when the extension is built:
they are a few transcendental calls per draw, and numpy's vectorized
``exp``/``arctan`` beat scalar libm there (see ``benchmarks/bench_kernels.py``).

``UNITRI_BACKEND=python`` or ``=cython`` forces one backend for every kernel.

Both backends consume identical uniforms and agree to a few ulps; libm and
numpy's vectorized ``exp``/``log`` may round differently, so outputs are not
guaranteed bit-identical *across* backends.  Within one configuration they are.
"""

import os

from unitri import _kernels_py

try:
    from unitri import _ckernels
except ImportError:  # extension not built
    _ckernels = None

KERNELS = ("heron", "c_from_ab", "right", "isosceles", "arbitrary", "stick_twice", "stick_once")
NUMPY_FASTER = ("right", "isosceles")

_forced = os.environ.get("UNITRI_BACKEND", "").strip().lower()
if _forced not in ("", "python", "cython"):
    raise ImportError(f"UNITRI_BACKEND must be 'python' or 'cython', got {_forced!r}")
if _forced == "cython" and _ckernels is None:
    raise ImportError("UNITRI_BACKEND=cython but unitri._ckernels is not built")


def _choose(name):
    if _ckernels is None or _forced == "python":
        return "python"
    if _forced == "cython" or name not in NUMPY_FASTER:
        return "cython"
    return "python"


def available_backends():
    return {"python": _kernels_py, **({"cython": _ckernels} if _ckernels else {})}


# kernel name -> backend actually used
SELECTED = {name: _choose(name) for name in KERNELS}
BACKEND = "cython" if "cython" in SELECTED.values() else "python"

_impls = available_backends()
heron = getattr(_impls[SELECTED["heron"]], "heron")
c_from_ab = getattr(_impls[SELECTED["c_from_ab"]], "c_from_ab")
right = getattr(_impls[SELECTED["right"]], "right")
isosceles = getattr(_impls[SELECTED["isosceles"]], "isosceles")
arbitrary = getattr(_impls[SELECTED["arbitrary"]], "arbitrary")
stick_twice = getattr(_impls[SELECTED["stick_twice"]], "stick_twice")
stick_once = getattr(_impls[SELECTED["stick_once"]], "stick_once")
