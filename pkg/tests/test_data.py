import numpy as np
import pytest

from sparsecox import SurvivalDataset, load_dataset, save_dataset, standardize, validate
from sparsecox.data import FORMAT_DENSE, FORMAT_SPARSE

from conftest import make_dataset


def write_survival(path, rows):
    with open(path, "wt") as fh:
        fh.write("id,time,status\n")
        for i, (t, d) in enumerate(rows, start=1):
            fh.write(f"{i},{t},{d}\n")


def test_two_subject_ordering(tmp_path):
    surv = tmp_path / "s.csv"
    des = tmp_path / "x.csv"
    write_survival(surv, [(1.0, 1), (2.0, 1)])
    with open(des, "wt") as fh:
        fh.write("id,x1\n1,0.0\n2,1.0\n")
    ds = load_dataset(surv, des, FORMAT_DENSE)
    # descending time: subject 2 first
    assert ds.order.tolist() == [1, 0]
    assert ds.event_count == 2
    assert ds.time_sorted.tolist() == [2.0, 1.0]


def test_sparse_empty_columns(tmp_path):
    surv = tmp_path / "s.csv"
    des = tmp_path / "x.coord"
    write_survival(surv, [(1.0, 1), (2.0, 0)])
    des.write_text("2 3 0\n")
    ds = load_dataset(surv, des, FORMAT_SPARSE)
    assert ds.p == 3
    assert all(ds.design.nnz(j) == 0 for j in range(3))


@pytest.mark.parametrize("fmt", [FORMAT_DENSE, FORMAT_SPARSE])
def test_save_load_round_trip(rng, tmp_path, fmt):
    ds, _ = make_dataset(rng, 40, 5)
    s1, d1 = tmp_path / "s1.csv", tmp_path / "d1.dat"
    save_dataset(ds, s1, d1, fmt)
    ds2 = load_dataset(s1, d1, fmt)
    s2, d2 = tmp_path / "s2.csv", tmp_path / "d2.dat"
    save_dataset(ds2, s2, d2, fmt)
    assert s1.read_bytes() == s2.read_bytes()
    assert d1.read_bytes() == d2.read_bytes()


def test_sparse_round_trip_large_sparse(rng, tmp_path):
    # sparse binary design in the style of the massive-sample scenario
    n, p, density = 3000, 150, 0.02
    cols = []
    for j in range(p):
        rows = np.flatnonzero(rng.random(n) < density)
        cols.append((rows, np.ones(rows.size)))
    t = rng.exponential(size=n)
    status = (rng.random(n) < 0.05).astype(int)
    status[0] = 1
    ds = SurvivalDataset.from_columns(t, status, n, p, cols)
    s1, d1 = tmp_path / "s.csv", tmp_path / "d.coord"
    save_dataset(ds, s1, d1, FORMAT_SPARSE)
    ds2 = load_dataset(s1, d1, FORMAT_SPARSE)
    s2, d2 = tmp_path / "s2.csv", tmp_path / "d2.coord"
    save_dataset(ds2, s2, d2, FORMAT_SPARSE)
    assert s1.read_bytes() == s2.read_bytes()
    assert d1.read_bytes() == d2.read_bytes()
    for j in (0, p // 2, p - 1):
        np.testing.assert_array_equal(ds.design.dense_column(j), ds2.design.dense_column(j))


def test_load_errors_carry_line_numbers(tmp_path):
    surv = tmp_path / "s.csv"
    des = tmp_path / "x.coord"
    write_survival(surv, [(1.0, 1), (2.0, 1)])
    des.write_text("2 2 1\n3 1 1.0\n")
    with pytest.raises(ValueError, match=r"x\.coord:2.*out of range"):
        load_dataset(surv, des, FORMAT_SPARSE)

    des.write_text("2 2 2\n1 1 1.0\n")
    with pytest.raises(ValueError, match="nnz=2"):
        load_dataset(surv, des, FORMAT_SPARSE)

    bad = tmp_path / "bad.csv"
    bad.write_text("id,time,status\n1,0.0,1\n")
    with pytest.raises(ValueError, match="bad.csv:2.*nonpositive"):
        load_dataset(bad, des, FORMAT_SPARSE)

    bad.write_text("id,time,status\n1,1.0,2\n")
    with pytest.raises(ValueError, match=r"status outside"):
        load_dataset(bad, des, FORMAT_SPARSE)


def test_duplicate_sparse_entry_rejected(tmp_path):
    surv = tmp_path / "s.csv"
    des = tmp_path / "x.coord"
    write_survival(surv, [(1.0, 1), (2.0, 1)])
    des.write_text("2 2 2\n1 1 1.0\n1 1 2.0\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_dataset(surv, des, FORMAT_SPARSE)


def test_risk_sets_are_prefixes_brute_force(rng):
    for _ in range(25):
        n = int(rng.integers(2, 50))
        ds, (t, status, _) = make_dataset(rng, n, 2)
        for k, e in enumerate(ds.event_pos):
            t_event = ds.time_sorted[e]
            expected = {i for i in range(n) if t[i] >= t_event}
            prefix = {int(ds.order[q]) for q in range(ds.event_end[k] + 1)}
            assert prefix == expected


def test_ties_events_before_censorings(rng):
    t = np.array([3.0, 1.0, 1.0, 1.0, 2.0])
    status = np.array([0, 0, 1, 1, 1])
    X = rng.standard_normal((5, 1))
    ds = SurvivalDataset.from_dense(t, status, X)
    # within the time-1 tie group, events (indices 2, 3) precede censoring (1)
    assert ds.order.tolist() == [0, 4, 2, 3, 1]


def test_validate_detects_problems(rng):
    ds, _ = make_dataset(rng, 10, 2)
    assert validate(ds).ok

    ds.time = ds.time.copy()
    ds.time[3] = 0.0
    rep = validate(ds)
    assert not rep.ok and "nonpositive" in rep.first_violation

    ds2, _ = make_dataset(rng, 10, 2)
    ds2.order = np.roll(ds2.order, 1)
    rep2 = validate(ds2)
    assert not rep2.ok
    assert "order" in rep2.first_violation or "risk set" in rep2.first_violation


def test_standardize_center_and_scale():
    t = np.array([1.0, 2.0])
    status = np.array([1, 1])
    ds = SurvivalDataset.from_dense(t, status, np.array([[2.0], [0.0]]))
    out = standardize(ds, "center-and-scale")
    col = out.design.dense_column(0)
    # centered mean 0, sum of squares n-1
    assert abs(col.sum()) < 1e-12
    assert abs(np.dot(col, col) - 1.0) < 1e-12
    # subject with x=2 sits sqrt(1/2) above the mean after scaling
    orig_rows = out.order[np.arange(2)]
    dense_by_input = np.empty(2)
    dense_by_input[orig_rows] = col
    np.testing.assert_allclose(dense_by_input, [np.sqrt(0.5), -np.sqrt(0.5)], atol=1e-12)


def test_standardize_modes(rng):
    ds, (t, status, X) = make_dataset(rng, 30, 4)
    assert standardize(ds, "none") is ds

    sc_only = standardize(ds, "scale-only")
    for j in range(4):
        col = sc_only.design.dense_column(j)
        assert abs(np.mean(col**2) - 1.0) < 1e-12  # unit root mean square
        assert sc_only.design.offset[j] == 0.0

    cs = standardize(ds, "center-and-scale")
    for j in range(4):
        col = cs.design.dense_column(j)
        assert abs(col.sum()) < 1e-9
        assert abs(col @ col - (ds.n - 1)) < 1e-9
    # idempotence is exact
    assert standardize(cs, "center-and-scale") is cs

    const = SurvivalDataset.from_dense(t, status, np.ones((30, 1)))
    with pytest.raises(ValueError, match="x1"):
        standardize(const, "center-and-scale")


def test_standardized_dataset_refuses_save(rng, tmp_path):
    ds, _ = make_dataset(rng, 10, 2)
    cs = standardize(ds, "center-and-scale")
    with pytest.raises(ValueError, match="standardized"):
        save_dataset(cs, tmp_path / "s.csv", tmp_path / "d.csv", FORMAT_DENSE)


def test_column_subset_view_shares_arrays(rng):
    ds, _ = make_dataset(rng, 20, 6)
    sub = ds.select_columns([4, 1])
    assert sub.p == 2
    assert sub.design.columns[0] is ds.design.columns[4]
    np.testing.assert_array_equal(sub.design.dense_column(1), ds.design.dense_column(1))
    assert sub.event_pos is ds.event_pos
