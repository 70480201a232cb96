import numpy as np
import pytest

from anisoeq.sampling import SampleSet


def test_deterministic():
    a = SampleSet(count=500).points()
    b = SampleSet(count=500).points()
    assert a.tobytes() == b.tobytes()


def test_seed_changes_points():
    assert not np.array_equal(SampleSet(count=50).points(), SampleSet(count=50, seed=1).points())


def test_in_box_and_excluded():
    box = ((-1.0, 0.0, 2.0), (1.0, 0.5, 3.0))
    s = SampleSet(box=box, count=2000, exclusion=lambda p: np.linalg.norm(p[:, :2], axis=1) < 0.3)
    pts = s.points()
    assert pts.shape == (2000, 3)
    assert np.all(pts >= np.array(box[0])) and np.all(pts <= np.array(box[1]))
    assert np.all(np.linalg.norm(pts[:, :2], axis=1) >= 0.3)


def test_low_discrepancy_coverage():
    pts = SampleSet(count=4096).points()
    counts, _ = np.histogramdd(pts, bins=(4, 4, 4), range=[(0, 1)] * 3)
    assert counts.min() > 0.8 * 64 and counts.max() < 1.2 * 64


def test_invalid():
    with pytest.raises(ValueError):
        SampleSet(box=((0, 0, 0), (0, 1, 1)))
    with pytest.raises(ValueError):
        SampleSet(count=0)
    with pytest.raises(ValueError):
        SampleSet(count=10, exclusion=lambda p: np.ones(len(p), bool)).points()
