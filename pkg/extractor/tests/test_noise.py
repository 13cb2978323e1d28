import numpy as np
import pytest

from embextract import inject_label_noise


def test_zero_fraction_unchanged():
    labels = np.arange(10, dtype=np.int32) % 3
    out, mask = inject_label_noise(labels, 0.0, seed=1)
    np.testing.assert_array_equal(out, labels)
    assert not mask.any()


def test_same_seed_same_mask():
    labels = np.arange(500, dtype=np.int32) % 5
    a, mask_a = inject_label_noise(labels, 0.3, seed=9)
    b, mask_b = inject_label_noise(labels, 0.3, seed=9)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(mask_a, mask_b)


def test_one_over_k_mask_fraction():
    labels = np.repeat(np.arange(10, dtype=np.int32), 1000)
    _, mask = inject_label_noise(labels, 0.2, seed=4)
    assert mask.mean() == pytest.approx(0.2 * (1 - 1 / 10), abs=0.01)


def test_transitions_uniform_chi_square():
    # redrawn labels must be uniform over all k classes regardless of the
    # true class: chi-square GOF over the k x k transition table of the
    # redrawn rows, df = k*(k-1) = 56, 99.9% critical value 95.75
    k = 8
    labels = np.repeat(np.arange(k, dtype=np.int32), 2000)
    out, _ = inject_label_noise(labels, 0.5, seed=11)
    redrawn_rows = np.flatnonzero(out != labels)
    # rows that kept their label by redraw are invisible; reconstruct the
    # redraw set from determinism instead
    rng = np.random.default_rng(11)
    chosen = rng.choice(labels.size, size=int(round(0.5 * labels.size)), replace=False)
    table = np.zeros((k, k))
    for i in chosen:
        table[labels[i], out[i]] += 1
    expected = table.sum(axis=1, keepdims=True) / k
    chi2 = float(((table - expected) ** 2 / expected).sum())
    assert set(redrawn_rows) <= set(chosen.tolist())
    assert chi2 < 95.75
