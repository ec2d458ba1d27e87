"""Right-censored survival data with a column-sparse design matrix.

Subjects are kept internally in descending-time order so that every risk set
{j : T_j >= T_i} is a contiguous prefix of the sorted arrays.  Ties are
ordered events-before-censorings (stable by input index), and tied event
times share one risk set per the Breslow convention.  Design columns are
stored as (position, value) pairs in that same order, which is what the
coordinate-descent kernels scan.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SparseColumnMatrix",
    "SurvivalDataset",
    "ValidationReport",
    "load_dataset",
    "save_dataset",
    "standardize",
    "validate",
    "to_original_scale",
]

MODE_NONE = "none"
MODE_SCALE = "scale-only"
MODE_CENTER_SCALE = "center-and-scale"
_MODES = (MODE_NONE, MODE_SCALE, MODE_CENTER_SCALE)


class _Column:
    """One sparse column: positions (ascending, in sorted-subject order) and values.

    Carries lazily-built scan caches shared between a dataset and any
    column-subset view of it (the event structure is identical for both).
    """

    __slots__ = ("pos", "val", "ev_lo", "ev_idx", "sum_delta_x")

    def __init__(self, pos, val):
        self.pos = pos
        self.val = val
        self.ev_lo = -1          # first event index whose risk set touches this column
        self.ev_idx = None       # per-event count of column entries inside the risk set
        self.sum_delta_x = None  # sum of values at event rows (beta-independent)

    @property
    def nnz(self):
        return self.pos.shape[0]


class SparseColumnMatrix:
    """Column-oriented sparse matrix aligned to a dataset's sorted order.

    The dense value of entry (k, j) is ``stored - offset[j]``: centering is
    carried as a per-column offset so that standardization never densifies
    the storage.  ``scale[j]`` maps standardized coefficients back to the
    original covariate scale (beta_original = beta_stored / scale).
    """

    def __init__(self, n, p, columns, scale=None, offset=None, standardization=MODE_NONE):
        self.n = int(n)
        self.p = int(p)
        self.columns = columns
        self.scale = np.ones(p) if scale is None else scale
        self.offset = np.zeros(p) if offset is None else offset
        self.standardization = standardization

    def column(self, j):
        c = self.columns[j]
        return c.pos, c.val

    def nnz(self, j=None):
        if j is None:
            return sum(c.nnz for c in self.columns)
        return self.columns[j].nnz

    def dense_column(self, j):
        """Materialize column j (dense semantics, length n)."""
        c = self.columns[j]
        out = np.zeros(self.n)
        out[c.pos] = c.val
        if self.offset[j] != 0.0:
            out -= self.offset[j]
        return out

    def to_dense(self):
        return np.column_stack([self.dense_column(j) for j in range(self.p)]) \
            if self.p else np.zeros((self.n, 0))


class SurvivalDataset:
    """Immutable right-censored sample, sorted for prefix-sum risk sets.

    Attributes
    ----------
    time, status : arrays in the original input order.
    order : order[k] = original index of the subject at sorted position k
        (descending time; ties: events first, then stable by input index).
    design : SparseColumnMatrix in sorted-position space.
    event_pos : sorted positions with status 1 (ascending).
    event_end : for each event, the last sorted position with an equal or
        later... strictly: the last position with time >= the event's time,
        i.e. the inclusive end of its risk-set prefix (Breslow ties share it).

    Treat instances as read-only after construction; they may be shared
    across concurrent workers.
    """

    def __init__(self, time, status, design, order=None):
        time = np.asarray(time, dtype=np.float64)
        status = np.asarray(status)
        n = time.shape[0]
        if status.shape[0] != n:
            raise ValueError("time and status lengths differ")
        if n == 0:
            raise ValueError("empty dataset")
        if not np.all(np.isfinite(time)) or np.any(time <= 0.0):
            bad = int(np.flatnonzero(~np.isfinite(time) | (time <= 0.0))[0])
            raise ValueError(f"nonpositive or non-finite time for subject {bad + 1}")
        status_f = np.asarray(status, dtype=np.float64)
        if not np.all((status_f == 0.0) | (status_f == 1.0)):
            bad = int(np.flatnonzero((status_f != 0.0) & (status_f != 1.0))[0])
            raise ValueError(f"status outside {{0,1}} for subject {bad + 1}")
        status = status_f.astype(np.int8)
        if design.n != n:
            raise ValueError("design row count does not match survival data")

        self.time = time
        self.status = status
        self.n = n
        self.p = design.p
        self.design = design
        if order is None:
            order = np.lexsort((np.arange(n), -status, -time))
        self.order = np.asarray(order, dtype=np.int64)

        self.time_sorted = time[self.order]
        self.status_sorted = status[self.order]
        self.event_count = int(self.status_sorted.sum())
        self.event_pos = np.flatnonzero(self.status_sorted == 1).astype(np.int64)
        # last position with time >= t  ==  (# of sorted times >= t) - 1
        rev = self.time_sorted[::-1]
        cnt_ge = n - np.searchsorted(rev, self.time_sorted[self.event_pos], side="left")
        self.event_end = (cnt_ge - 1).astype(np.int64)

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_dense(cls, time, status, X):
        """Build from a dense n-by-p matrix; zero entries are not stored."""
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        time = np.asarray(time, dtype=np.float64)
        order = np.lexsort((np.arange(n), -np.asarray(status, dtype=np.float64), -time))
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        cols = []
        for j in range(X.shape[1]):
            rows = np.flatnonzero(X[:, j] != 0.0)
            pos = rank[rows]
            srt = np.argsort(pos, kind="stable")
            cols.append(_Column(pos[srt].astype(np.int64), X[rows[srt], j].copy()))
        design = SparseColumnMatrix(n, X.shape[1], cols)
        return cls(time, status, design, order=order)

    @classmethod
    def from_columns(cls, time, status, n, p, columns):
        """Build from per-column (original_rows, values) pairs (0-based rows)."""
        time = np.asarray(time, dtype=np.float64)
        order = np.lexsort((np.arange(n), -np.asarray(status, dtype=np.float64), -time))
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        cols = []
        for rows, vals in columns:
            rows = np.asarray(rows, dtype=np.int64)
            vals = np.asarray(vals, dtype=np.float64)
            keep = vals != 0.0
            rows, vals = rows[keep], vals[keep]
            pos = rank[rows]
            srt = np.argsort(pos, kind="stable")
            cols.append(_Column(pos[srt], vals[srt]))
        design = SparseColumnMatrix(n, p, cols)
        return cls(time, status, design, order=order)

    # -- views ------------------------------------------------------------

    def select_columns(self, indices):
        """Column-subset view sharing all arrays (no copies of column data)."""
        indices = np.asarray(indices, dtype=np.int64)
        sub = SparseColumnMatrix(
            self.n,
            int(indices.shape[0]),
            [self.design.columns[int(j)] for j in indices],
            scale=self.design.scale[indices],
            offset=self.design.offset[indices],
            standardization=self.design.standardization,
        )
        ds = SurvivalDataset.__new__(SurvivalDataset)
        ds.time = self.time
        ds.status = self.status
        ds.n = self.n
        ds.p = sub.p
        ds.design = sub
        ds.order = self.order
        ds.time_sorted = self.time_sorted
        ds.status_sorted = self.status_sorted
        ds.event_count = self.event_count
        ds.event_pos = self.event_pos
        ds.event_end = self.event_end
        return ds

    def dense_design_original_order(self):
        """Dense design with rows in the original input order (small data only)."""
        X = self.design.to_dense()
        out = np.empty_like(X)
        out[self.order] = X
        return out


class ValidationReport:
    def __init__(self, ok, problems):
        self.ok = ok
        self.problems = problems

    @property
    def first_violation(self):
        return self.problems[0] if self.problems else None

    def __repr__(self):
        return f"ValidationReport(ok={self.ok}, problems={self.problems!r})"


def validate(ds):
    """Check every dataset invariant; diagnostic only, never raises."""
    problems = []
    n = ds.n
    if np.any(ds.time <= 0.0) or not np.all(np.isfinite(ds.time)):
        problems.append("nonpositive time")
    if not np.all((ds.status == 0) | (ds.status == 1)):
        problems.append("status outside {0,1}")
    if sorted(ds.order.tolist()) != list(range(n)):
        problems.append("order not a permutation")
    else:
        ts = ds.time[ds.order]
        if np.any(np.diff(ts) > 0):
            problems.append("order not sorted by descending time")
        else:
            same = np.flatnonzero(np.diff(ts) == 0)
            st = ds.status[ds.order]
            if np.any((st[same] == 0) & (st[same + 1] == 1)):
                problems.append("tie order: censoring precedes event at equal time")
        if not np.array_equal(ts, ds.time_sorted):
            problems.append("cached sorted times inconsistent with order")
    # risk-set prefix property at event positions
    for k, e in enumerate(ds.event_pos):
        t = ds.time_sorted[e]
        in_risk = ds.time_sorted >= t
        end = ds.event_end[k]
        if not (np.all(in_risk[: end + 1]) and not np.any(in_risk[end + 1 :])):
            problems.append(f"risk set for event at position {e} is not a prefix")
            break
    for j, c in enumerate(ds.design.columns):
        if c.nnz == 0:
            continue
        if np.any(np.diff(c.pos) <= 0):
            problems.append(f"column {j + 1}: positions not strictly increasing")
            break
        if c.pos[0] < 0 or c.pos[-1] >= n:
            problems.append(f"column {j + 1}: position out of range")
            break
        if not np.all(np.isfinite(c.val)) or np.any(c.val == 0.0):
            problems.append(f"column {j + 1}: non-finite or stored-zero value")
            break
    return ValidationReport(len(problems) == 0, problems)


# -- standardization -------------------------------------------------------


def standardize(ds, mode):
    """Return a standardized copy of the dataset (sparsity preserved).

    center-and-scale: dense semantics become mean 0 and sum of squares n-1
    per column, with the centering held in per-column offsets.  scale-only:
    divide each column by its root mean square, no centering.  none: the
    dataset is returned unchanged.

    Re-standardizing with the same mode is an exact no-op.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown standardization mode {mode!r}")
    if mode == MODE_NONE or ds.design.standardization == mode:
        return ds
    if ds.design.standardization != MODE_NONE:
        raise ValueError("dataset is already standardized with a different mode")
    if ds.n < 2:
        raise ValueError("standardization requires n >= 2")

    n, p = ds.n, ds.p
    cols = []
    scale = np.ones(p)
    offset = np.zeros(p)
    for j, c in enumerate(ds.design.columns):
        s1 = float(c.val.sum())
        s2 = float(np.dot(c.val, c.val))
        if mode == MODE_CENTER_SCALE:
            mean = s1 / n
            var = (s2 - n * mean * mean) / (n - 1)
            if var <= 0.0:
                raise ValueError(f"constant column x{j + 1} cannot be centered and scaled")
            s = float(np.sqrt(var))
            cols.append(_Column(c.pos, c.val / s))
            scale[j] = s
            offset[j] = mean / s
        else:  # scale-only
            rms = float(np.sqrt(s2 / n))
            if rms == 0.0:
                cols.append(_Column(c.pos, c.val.copy()))
                continue
            cols.append(_Column(c.pos, c.val / rms))
            scale[j] = rms
    design = SparseColumnMatrix(n, p, cols, scale=scale, offset=offset, standardization=mode)
    return SurvivalDataset(ds.time, ds.status, design, order=ds.order)


def to_original_scale(ds, beta):
    """Map coefficients fit on a standardized dataset back to the input scale."""
    return np.asarray(beta, dtype=np.float64) / ds.design.scale


# -- file I/O ---------------------------------------------------------------

FORMAT_DENSE = "dense-csv"
FORMAT_SPARSE = "sparse-coord"


def _fmt(x):
    # shortest round-trip decimal form; locale independent
    return repr(float(x))


def _parse_float(tok, path, lineno, what):
    try:
        return float(tok)
    except ValueError:
        raise ValueError(f"{path}:{lineno}: malformed {what} {tok!r}") from None


def load_dataset(survival_file, design_file, format):
    """Load survival and design files into a validated, sorted dataset.

    The survival file is a CSV with header ``id,time,status`` and ids
    1..n in order.  ``dense-csv`` designs have header ``id,x1,...,xp``.
    ``sparse-coord`` designs start with a ``n p nnz`` line followed by
    ``row col value`` triples (1-based, any order); a dense matrix is
    never materialized for that format.
    """
    if format not in (FORMAT_DENSE, FORMAT_SPARSE):
        raise ValueError(f"unknown design format {format!r}")

    times, status = [], []
    with open(survival_file, "rt", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "id,time,status":
            raise ValueError(f"{survival_file}:1: expected header 'id,time,status'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{survival_file}:{lineno}: expected 3 fields")
            sid = parts[0].strip()
            if sid != str(len(times) + 1):
                raise ValueError(f"{survival_file}:{lineno}: ids must run 1..n in order, got {sid!r}")
            t = _parse_float(parts[1], survival_file, lineno, "time")
            if not np.isfinite(t) or t <= 0.0:
                raise ValueError(f"{survival_file}:{lineno}: nonpositive time")
            d = parts[2].strip()
            if d not in ("0", "1"):
                raise ValueError(f"{survival_file}:{lineno}: status outside {{0,1}}")
            times.append(t)
            status.append(int(d))
    n = len(times)
    if n == 0:
        raise ValueError(f"{survival_file}: no subjects")
    time = np.asarray(times)
    status = np.asarray(status, dtype=np.int8)

    if format == FORMAT_DENSE:
        with open(design_file, "rt", encoding="utf-8") as fh:
            header = fh.readline().strip()
            names = header.split(",")
            if names[0] != "id" or any(nm != f"x{k}" for k, nm in enumerate(names[1:], start=1)):
                raise ValueError(f"{design_file}:1: expected header 'id,x1,...,xp'")
            p = len(names) - 1
            X = np.zeros((n, p))
            count = 0
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != p + 1:
                    raise ValueError(f"{design_file}:{lineno}: expected {p + 1} fields")
                if parts[0].strip() != str(count + 1):
                    raise ValueError(f"{design_file}:{lineno}: ids must run 1..n in order")
                for k in range(p):
                    X[count, k] = _parse_float(parts[k + 1], design_file, lineno, "value")
                count += 1
            if count != n:
                raise ValueError(f"{design_file}: row count {count} does not match survival n={n}")
        return SurvivalDataset.from_dense(time, status, X)

    # sparse-coord
    with open(design_file, "rt", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{design_file}:1: expected 'n p nnz' header")
        try:
            fn, p, nnz = (int(tok) for tok in header)
        except ValueError:
            raise ValueError(f"{design_file}:1: expected 'n p nnz' header") from None
        if fn != n:
            raise ValueError(f"{design_file}:1: n={fn} does not match survival n={n}")
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz)
        count = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{design_file}:{lineno}: expected 'row col value'")
            if count >= nnz:
                raise ValueError(f"{design_file}:{lineno}: more than nnz={nnz} entries")
            try:
                r, c = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{design_file}:{lineno}: malformed indices") from None
            if not (1 <= r <= n) or not (1 <= c <= p):
                raise ValueError(f"{design_file}:{lineno}: index out of range")
            v = _parse_float(parts[2], design_file, lineno, "value")
            if not np.isfinite(v):
                raise ValueError(f"{design_file}:{lineno}: non-finite value")
            rows[count], cols[count], vals[count] = r - 1, c - 1, v
            count += 1
        if count != nnz:
            raise ValueError(f"{design_file}: {count} entries but header declares nnz={nnz}")
    key = cols * n + rows
    if nnz and np.unique(key).shape[0] != nnz:
        raise ValueError(f"{design_file}: duplicate (row, col) entry")
    col_lists = []
    srt = np.argsort(key, kind="stable")
    rows, cols, vals = rows[srt], cols[srt], vals[srt]
    bounds = np.searchsorted(cols, np.arange(p + 1))
    for j in range(p):
        lo, hi = bounds[j], bounds[j + 1]
        col_lists.append((rows[lo:hi], vals[lo:hi]))
    return SurvivalDataset.from_columns(time, status, n, p, col_lists)


def save_dataset(ds, survival_file, design_file, format):
    """Write canonical text files; the inverse of load_dataset.

    Standardized datasets are refused: the offset metadata has no file
    representation and would be lost silently.
    """
    if ds.design.standardization != MODE_NONE:
        raise ValueError("cannot save a standardized dataset; save the raw data instead")
    if format not in (FORMAT_DENSE, FORMAT_SPARSE):
        raise ValueError(f"unknown design format {format!r}")
    with open(survival_file, "wt", encoding="utf-8") as fh:
        fh.write("id,time,status\n")
        for i in range(ds.n):
            fh.write(f"{i + 1},{_fmt(ds.time[i])},{int(ds.status[i])}\n")
    if format == FORMAT_DENSE:
        X = ds.dense_design_original_order()
        with open(design_file, "wt", encoding="utf-8") as fh:
            fh.write("id," + ",".join(f"x{j + 1}" for j in range(ds.p)) + "\n")
            for i in range(ds.n):
                fh.write(str(i + 1) + "," + ",".join(_fmt(v) for v in X[i]) + "\n")
        return
    # canonical sparse order: by column, then by original row
    with open(design_file, "wt", encoding="utf-8") as fh:
        total = ds.design.nnz()
        fh.write(f"{ds.n} {ds.p} {total}\n")
        for j in range(ds.p):
            c = ds.design.columns[j]
            rows = ds.order[c.pos]
            srt = np.argsort(rows, kind="stable")
            for k in srt:
                fh.write(f"{rows[k] + 1} {j + 1} {_fmt(c.val[k])}\n")
