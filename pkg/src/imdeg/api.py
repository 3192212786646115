"""High-level entry points: native or canonical-mode degradation of one image."""

from __future__ import annotations

import warnings

import numpy as np

from imdeg import degradations as _deg
from imdeg.degradations import DEFAULT_SEED, DegradationSpec
from imdeg.image import as_image, freeze


class SaturationWarning(UserWarning):
    """A canonical target beyond the backend's strongest native level."""


def to_hwc(image):
    """Accept (H, W, 3) arrays, (3, H, W) tensors or anything with ``.numpy()``.

    Returns the (H, W, 3) float image and a flag telling whether the input
    was channel-first, so results can be returned in the caller's layout.
    """
    if hasattr(image, "detach"):
        image = image.detach()
    if hasattr(image, "cpu"):
        image = image.cpu()
    if hasattr(image, "numpy") and not isinstance(image, np.ndarray):
        image = image.numpy()
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[0] == 3 and arr.shape[2] != 3:
        return as_image(np.moveaxis(arr, 0, -1)), True
    return as_image(arr), False


def resolve_native(severity, mode="native", calibration=None, canonical_strengths=None):
    """Native level for a requested severity; returns (level, saturated)."""
    if mode == "native":
        return int(severity), False
    if mode != "canonical":
        raise ValueError(f"mode must be 'native' or 'canonical', got {mode!r}")
    if calibration is None:
        raise ValueError("canonical mode needs a calibration")
    from dataclasses import replace

    from imdeg.calibration import map_canonical

    axis = calibration.axis
    if canonical_strengths is not None:
        levels = tuple(float(v) for v in canonical_strengths)
        axis = replace(axis, levels=levels, base=min(axis.base, len(levels)))
    m = map_canonical(axis, calibration.table, severity)
    return m.native, m.saturated


def apply_degradation(image, spec=None, *, paper=None, backend=None, term=None, severity=None,
                      mode="native", calibration=None, canonical_strengths=None,
                      seed=DEFAULT_SEED, image_id=0, position=0):
    """Degrade one image.

    Either pass a :class:`DegradationSpec` or describe the operator with
    ``backend``/``paper``, ``term`` and ``severity``. In canonical mode the
    severity indexes the calibration's canonical axis and is mapped to the
    native level with the nearest measured strength.
    """
    x, chw = to_hwc(image)
    if spec is None:
        b = backend or paper
        if b is None or term is None or severity is None:
            raise TypeError("apply_degradation needs a spec or backend/paper, term and severity")
        if calibration is not None and mode == "canonical":
            if (_deg.get_operator(b, term).backend, _deg.get_operator(b, term).key) != \
                    (calibration.table.backend, calibration.table.term):
                raise ValueError("calibration was measured for a different operator")
        native, saturated = resolve_native(severity, mode, calibration, canonical_strengths)
        if saturated:
            warnings.warn(f"canonical level {severity} is beyond the measured range; "
                          f"using the strongest native level {native}", SaturationWarning, stacklevel=2)
        spec = DegradationSpec(b, term, native, seed)
    y = _deg.apply_degradation(x, spec, image_id=image_id, position=position)
    if chw:
        return freeze(np.ascontiguousarray(np.moveaxis(y, -1, 0)))
    return y


degrade = apply_degradation
