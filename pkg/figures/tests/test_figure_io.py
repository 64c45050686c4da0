import math

import pytest

from sps_norm_figures.csvio import HeaderMismatchError, finite_or_nan, read_table


def sweep_csv(tmp_path, name="fig-x.csv", preset="coherent-2ls",
              rows=((0.1, 0.2, 0.3, 0.2), (1.0, 0.4, 0.5, 0.4))):
    lines = [
        "# sps-norm 0.1.0",
        f"# scenario: {name[:-4]}",
        f"# preset: {preset}",
        "# axis: filter_linewidth",
        "axis,g2,g3,norm3,population,p0,p1,flags",
    ]
    for axis, g2, g3, n3 in rows:
        lines.append(
            f"{axis:.17e},{g2:.17e},{g3:.17e},{n3:.17e},"
            f"{0.5:.17e},{0.6:.17e},{0.3:.17e},ok"
        )
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n")
    return p


def test_read_table_round_trip(tmp_path):
    p = sweep_csv(tmp_path)
    t = read_table(p)
    assert t.meta["preset"] == "coherent-2ls"
    assert t.label == "coherent-2ls"
    assert t.columns[-1] == "flags"
    assert t.column("axis") == [0.1, 1.0]
    assert t.column("norm3") == [0.2, 0.4]
    assert t.column("g3") == [0.3, 0.5]
    assert [r[-1] for r in t.rows] == ["ok", "ok"]


def test_label_falls_back_to_scenario_then_stem(tmp_path):
    p = tmp_path / "bare.csv"
    p.write_text("axis,norm3,flags\n1.0,2.0,ok\n")
    assert read_table(p).label == "bare"
    q = tmp_path / "named.csv"
    q.write_text("# scenario: my-run\naxis,norm3,flags\n1.0,2.0,ok\n")
    assert read_table(q).label == "my-run"


def test_missing_column_and_file_errors(tmp_path):
    t = read_table(sweep_csv(tmp_path))
    with pytest.raises(HeaderMismatchError, match="norm9"):
        t.column("norm9")
    with pytest.raises(HeaderMismatchError, match="not found"):
        read_table(tmp_path / "absent.csv")


def test_malformed_rows_and_empty_tables(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("axis,norm3,flags\n1.0,2.0\n")
    with pytest.raises(HeaderMismatchError, match="2 cells"):
        read_table(p)
    q = tmp_path / "empty.csv"
    q.write_text("# just comments\n")
    with pytest.raises(HeaderMismatchError, match="no table"):
        read_table(q)


def test_nan_cells_survive(tmp_path):
    p = tmp_path / "failed.csv"
    p.write_text("axis,norm3,flags\n1.0,nan,ERROR:ValueError\n")
    t = read_table(p)
    assert math.isnan(t.column("norm3")[0])
    assert t.rows[0][-1] == "ERROR:ValueError"


def test_finite_or_nan_coerces_strays():
    out = finite_or_nan([1.0, "oops", 2.0])
    assert out[0] == 1.0 and out[2] == 2.0
    assert math.isnan(out[1])
