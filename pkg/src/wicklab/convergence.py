"""Log-log slope fitting for measured convergence orders."""

import numpy as np

from .errors import DegenerateInput


def fit_slope(points):
    """Ordinary least-squares slope of log y against log x.

    points: sequence of (x, y) pairs, all strictly positive.  Returns
    (slope, residual) where residual is the largest absolute fit error in
    log space.
    """
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegenerateInput("need at least two (x, y) pairs")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise DegenerateInput("log-log fit needs positive finite values")
    lx = np.log(pts[:, 0])
    ly = np.log(pts[:, 1])
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    residual = float(np.max(np.abs(design @ coef - ly)))
    return float(coef[0]), residual


class ConvergenceSeries:
    """A defect measured over a refinement sweep, with its fitted order.

    Measurements that are exactly zero are kept in the record but dropped
    from the fit; a series with fewer than three usable points gets no
    slope.
    """

    def __init__(self, name, measurements, slope_band):
        self.name = name
        self.measurements = list(measurements)  # (bins, delta_omega, defect)
        self.slope_band = slope_band
        usable = [(d, v) for _, d, v in self.measurements if v > 0]
        if len(usable) >= 3:
            # defect vs delta_omega: positive slope = decays under refinement
            self.slope, self.residual = fit_slope(usable)
        else:
            self.slope, self.residual = None, None

    @property
    def passed(self):
        if self.slope is None:
            # an identically-zero defect beats any decay-rate requirement
            return all(v == 0 for _, _, v in self.measurements)
        lo, hi = self.slope_band
        if lo is not None and self.slope < lo:
            return False
        if hi is not None and self.slope > hi:
            return False
        return True
