"""Cox log-partial likelihood and per-coordinate derivatives.

All quantities are evaluated in the dataset's descending-time order, where
each event's risk set is the prefix ending at ``event_end``.  Writing
D_e for the prefix sum of w = exp(eta) at an event's risk-set end,
A_e / B_e for the prefix sums of x*w / x^2*w over a column's nonzero
entries, the unpenalized log-partial likelihood and its coordinate
derivatives are

    ll   = sum_events eta_e - ln D_e                     (Breslow ties)
    g1_j = sum_events x_ej - A_e / D_e
    g2_j = -sum_events [ B_e/D_e - (A_e/D_e)^2 ]         (always <= 0)

Per column the scan touches only the nonzero entries plus the events at or
after the first nonzero, so an all-zero suffix of a column costs nothing.
Penalty terms are the solver's business, never added here.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinearPredictorState",
    "init_state",
    "log_partial_likelihood",
    "coord_derivatives",
    "apply_coord_update",
    "full_gradient",
]


def _column_scan_cache(ds, j):
    """Event-scan cache for column j: built once, shared with subset views."""
    c = ds.design.columns[j]
    if c.ev_idx is None:
        if c.nnz == 0:
            c.ev_lo = ds.event_pos.shape[0]
            c.ev_idx = np.empty(0, dtype=np.int32)
            c.sum_delta_x = 0.0
        else:
            first = c.pos[0]
            lo = int(np.searchsorted(ds.event_end, first, side="left"))
            c.ev_lo = lo
            c.ev_idx = np.searchsorted(c.pos, ds.event_end[lo:], side="right").astype(np.int32)
            c.sum_delta_x = float(c.val[ds.status_sorted[c.pos] == 1].sum())
    return c


class _CoordTrial:
    """Uncommitted coordinate step: holds everything needed to commit."""

    __slots__ = ("j", "delta", "new_eta", "new_w", "patch", "loglik_delta")

    def __init__(self, j, delta, new_eta, new_w, patch, loglik_delta):
        self.j = j
        self.delta = delta
        self.new_eta = new_eta
        self.new_w = new_w
        self.patch = patch
        self.loglik_delta = loglik_delta


class LinearPredictorState:
    """Per-subject linear predictors and risk-set denominators for one beta.

    Owned by a single solver worker.  ``denom`` entries at positions >=
    ``stale_from`` are stale until ``denominators()`` recomputes them;
    ``denom_at_events`` is always kept exact because every likelihood and
    derivative evaluation reads it.
    """

    def __init__(self, ds, beta):
        beta = np.array(beta, dtype=np.float64)
        if beta.shape[0] != ds.p:
            raise ValueError(f"beta has length {beta.shape[0]}, expected p={ds.p}")
        if not np.all(np.isfinite(beta)):
            raise ValueError("non-finite coefficient")
        self.ds = ds
        self.beta = beta
        # exp must stay finite even after summing n terms into a prefix
        self.eta_limit = 700.0 - float(np.log(ds.n + 1.0))
        eta = np.zeros(ds.n)
        for j in np.flatnonzero(beta):
            c = ds.design.columns[j]
            if c.nnz:
                eta[c.pos] += beta[j] * c.val
        bad = np.flatnonzero(np.abs(eta) > self.eta_limit)
        if bad.size:
            subject = int(ds.order[bad[0]])
            raise OverflowError(
                f"linear predictor overflow for subject {subject + 1} (eta={eta[bad[0]]:.3g})"
            )
        self.eta = eta
        self.w = np.exp(eta)
        self.denom = np.cumsum(self.w)
        self.denom_at_events = self.denom[ds.event_end].copy()
        self.stale_from = ds.n

    # -- evaluation -------------------------------------------------------

    def loglik(self):
        ds = self.ds
        if ds.event_count == 0:
            return 0.0
        return float(self.eta[ds.event_pos].sum() - np.log(self.denom_at_events).sum())

    def coord_derivatives(self, j):
        """(g1, g2) of the log-partial likelihood for coordinate j."""
        ds = self.ds
        c = _column_scan_cache(ds, j)
        if c.nnz == 0 or c.ev_lo >= ds.event_pos.shape[0]:
            return 0.0, 0.0
        wj = self.w[c.pos]
        aw = c.val * wj
        cum_a = np.cumsum(aw)
        cum_b = np.cumsum(c.val * aw)
        sel = c.ev_idx - 1
        d = self.denom_at_events[c.ev_lo :]
        r = cum_a[sel] / d
        g1 = c.sum_delta_x - float(r.sum())
        g2 = float(np.dot(r, r) - (cum_b[sel] / d).sum())
        # exact math gives a per-event variance >= 0; clamp rounding residue
        return g1, min(g2, 0.0)

    def full_gradient(self):
        return np.array([self.coord_derivatives(j)[0] for j in range(self.ds.p)])

    # -- updates ----------------------------------------------------------

    def probe_coord_update(self, j, delta):
        """Evaluate a coordinate step without committing it.

        Returns a trial carrying the exact log-likelihood change, or None
        when exp(eta) would overflow.
        """
        ds = self.ds
        c = _column_scan_cache(ds, j)
        if c.nnz == 0 or delta == 0.0:
            return _CoordTrial(j, delta, None, None, None, 0.0)
        new_eta = self.eta[c.pos] + delta * c.val
        if np.abs(new_eta).max() > self.eta_limit:
            return None
        new_w = np.exp(new_eta)
        patch = np.cumsum(new_w - self.w[c.pos])[c.ev_idx - 1]
        if c.ev_lo < ds.event_pos.shape[0]:
            d_old = self.denom_at_events[c.ev_lo :]
            with np.errstate(divide="ignore", invalid="ignore"):
                dlog = np.log1p(patch / d_old)
            ll_delta = delta * c.sum_delta_x - float(dlog.sum())
        else:
            ll_delta = 0.0
        return _CoordTrial(j, delta, new_eta, new_w, patch, ll_delta)

    def commit(self, trial):
        ds = self.ds
        j, delta = trial.j, trial.delta
        self.beta[j] += delta
        if trial.new_eta is None:
            return
        c = ds.design.columns[j]
        self.eta[c.pos] = trial.new_eta
        self.w[c.pos] = trial.new_w
        if c.ev_lo < ds.event_pos.shape[0]:
            self.denom_at_events[c.ev_lo :] += trial.patch
        self.stale_from = min(self.stale_from, int(c.pos[0]))

    def apply_coord_update(self, j, delta):
        """Commit beta[j] += delta, updating eta/w/denominators at the
        column's nonzero rows only.  Raises OverflowError (state unchanged)
        when exp would overflow; the caller is expected to shrink the step.
        """
        if not np.isfinite(delta):
            raise ValueError("non-finite step")
        trial = self.probe_coord_update(j, delta)
        if trial is None:
            raise OverflowError(f"linear predictor overflow updating coordinate {j + 1}")
        self.commit(trial)

    # -- maintenance --------------------------------------------------------

    def denominators(self):
        """Full prefix-sum denominators (recomputes the stale tail)."""
        s = self.stale_from
        if s < self.ds.n:
            base = self.denom[s - 1] if s > 0 else 0.0
            self.denom[s:] = base + np.cumsum(self.w[s:])
            self.stale_from = self.ds.n
        return self.denom

    def refresh(self):
        """Rebuild denominators from w, clearing accumulated patch drift."""
        self.denom = np.cumsum(self.w)
        self.denom_at_events = self.denom[self.ds.event_end].copy()
        self.stale_from = self.ds.n


def init_state(ds, beta):
    return LinearPredictorState(ds, beta)


def log_partial_likelihood(state):
    return state.loglik()


def coord_derivatives(state, j):
    return state.coord_derivatives(j)


def apply_coord_update(state, j, delta):
    state.apply_coord_update(j, delta)
    return state


def full_gradient(state):
    return state.full_gradient()
