import os

import pytest

from spinfigs import FIGURE_IDS, build_spec, render
from spinfigs import cli, data, figures


@pytest.mark.parametrize("fid", FIGURE_IDS)
def test_every_figure_renders(fid, reference_dir, tmp_path):
    out = render(build_spec(fid, reference_dir), str(tmp_path))
    assert os.path.exists(out)
    assert os.path.getsize(out) > 1000


def test_unknown_id_rejected(reference_dir):
    with pytest.raises(data.DataError):
        build_spec("9", reference_dir)


def test_rescaling_applied_to_fig_2_and_5(reference_dir, tmp_path):
    for fid in ("2", "5"):
        spec = build_spec(fid, reference_dir)
        assert spec.transforms["x"] == "lambda^2 * t"
        svg = open(render(spec, str(tmp_path))).read()
        assert "\\lambda^2 t" in svg  # axis label survives into the file


def test_reference_lines_present(reference_dir, tmp_path):
    svg3 = open(render(build_spec("3", reference_dir), str(tmp_path))).read()
    assert "equilibrium -0.05" in svg3
    assert "threshold -0.04" in svg3
    svg6 = open(render(build_spec("6", reference_dir), str(tmp_path))).read()
    assert "0.95 lambda^-2" in svg6


def test_render_is_deterministic(reference_dir, tmp_path):
    a = open(render(build_spec("3", reference_dir),
                    str(tmp_path / "a")), "rb").read()
    b = open(render(build_spec("3", reference_dir),
                    str(tmp_path / "b")), "rb").read()
    assert a == b


def test_undefined_lambda_crit_annotated(reference_dir, tmp_path):
    svg = open(render(build_spec("4", reference_dir), str(tmp_path))).read()
    assert "no threshold crossing at N=10" in svg


def test_cli_all(reference_dir, tmp_path):
    out_dir = str(tmp_path / "figs")
    assert cli.main(["all", reference_dir, out_dir]) == 0
    for fid in FIGURE_IDS:
        assert os.path.exists(os.path.join(out_dir, f"figure_{fid}.svg"))


def test_cli_reports_missing_data(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert cli.main(["2", str(empty), str(tmp_path / "o")]) == 1


def test_gpb_reader_sorts_and_parses_nan(reference_dir):
    rows = data.read_gpb(reference_dir)
    lams = [r["lambda"] for r in rows]
    assert lams == sorted(lams)
    assert rows[-1]["numerator"] is None or rows[-1]["numerator"] != rows[-1]["numerator"]


def test_sweep_footer_parsed(reference_dir):
    rows, footer = data.read_sweep(reference_dir)
    assert footer["lambda_crit"][10] is None
    assert footer["lambda_crit"][16] == pytest.approx(0.29)
    assert footer["scaling_fit"]["b"] == pytest.approx(0.24)
    assert all(isinstance(r["longtime_avg"], float) for r in rows)
