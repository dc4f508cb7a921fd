import numpy as np
import pytest

from schwarzlat.io import (
    FormatError,
    format_sparse_function,
    parse_sparse_function,
    parse_sparse_text,
    write_sparse_function,
)
from schwarzlat.lattice import SparseFunction, random_function


def test_single_point():
    u = parse_sparse_text("0\t0\t1.5\n")
    assert u == SparseFunction({(0, 0): 1.5}) and u.dim == 2


def test_comments_and_blank_lines():
    u = parse_sparse_text("# header\n\n1\t2.0  # trailing\n-1\t0.5\n")
    assert u == SparseFunction({(1,): 2.0, (-1,): 0.5})


@pytest.mark.parametrize("text,line", [
    ("0\t0\t1\n0\t0\t2\n", 2),
    ("0\t0\t1\n1\t1\n", 2),
    ("0\t0\t1\n\n1\tx\t1\n", 3),
    ("0\t0\t-1\n", 1),
    ("0\t0\tnan\n", 1),
    ("0\t0\t0\n", 1),
    ("0\n", 1),
    ("0 0 1\n", 1),
])
def test_errors_name_the_line(text, line):
    with pytest.raises(FormatError, match=rf"in\.tsv:{line}:"):
        parse_sparse_text(text, "in.tsv")


def test_duplicate_point_message():
    with pytest.raises(FormatError, match="duplicate"):
        parse_sparse_text("3\t1.0\n3\t2.0\n")


def test_empty_file():
    with pytest.raises(FormatError, match="no data"):
        parse_sparse_text("# nothing\n")


def test_roundtrip_random(tmp_path):
    rng = np.random.default_rng(42)
    for k in range(100):
        d = int(rng.integers(1, 5))
        u = random_function(rng, d, int(rng.integers(1, 11)), 5, distinct=bool(k % 2))
        path = tmp_path / f"u{k}.tsv"
        write_sparse_function(u, path)
        back = parse_sparse_function(path)
        assert back == u and back.dim == u.dim
        assert all(back[x] == u[x] for x in u)


def test_format_is_canonical():
    u = SparseFunction({(1, 0): 0.1, (0, 0): 1.0 / 3.0})
    text = format_sparse_function(u)
    assert text.splitlines() == ["# dim=2 points=2", "0\t0\t0.3333333333333333", "1\t0\t0.1"]
    assert parse_sparse_text(text)[(0, 0)] == 1.0 / 3.0
