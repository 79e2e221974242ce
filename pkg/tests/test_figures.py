from qubodr.figures import render_report_figures

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def row(policy, **overrides):
    base = dict(
        family="mrf", n=4, seed=1, policy=policy, horizon=4,
        dr_initial=20.0, dr_final=5.0, rel_reduction=0.75,
        cmax_initial=1e6, cmax_final=30.0,
        pruned_fraction=None, median_rel_energy=None, n_opt=None,
    )
    base.update(overrides)
    return base


def test_empty_rows_render_nothing(tmp_path):
    assert render_report_figures([], tmp_path) == []
    assert list(tmp_path.iterdir()) == []


def test_full_rows_render_all_figures(tmp_path):
    rows = [
        row("greedy"),
        row("greedy", seed=2, rel_reduction=0.5, cmax_final=80.0),
        row("bnb", pruned_fraction=0.4, median_rel_energy=0.01),
        row("bnb", seed=2, pruned_fraction=0.6, median_rel_energy=0.02),
    ]
    paths = render_report_figures(rows, tmp_path, stem="demo")
    assert [p.name for p in paths] == [
        "demo_dr_reduction.png",
        "demo_cmax.png",
        "demo_pruned.png",
        "demo_rel_energy.png",
    ]
    for p in paths:
        blob = p.read_bytes()
        assert blob[:8] == PNG_MAGIC
        assert len(blob) > 1000


def test_dataless_figures_are_skipped(tmp_path):
    # no bnb rows and no sampling columns: only the two core figures appear
    paths = render_report_figures([row("greedy"), row("merge", seed=2)], tmp_path)
    assert [p.name for p in paths] == ["report_dr_reduction.png", "report_cmax.png"]


def test_nan_and_none_cells_are_ignored(tmp_path):
    rows = [
        row("greedy", cmax_initial=float("nan"), cmax_final=float("nan")),
        row("greedy", seed=2, rel_reduction=None,
            cmax_initial=float("nan"), cmax_final=float("nan")),
    ]
    paths = render_report_figures(rows, tmp_path)
    assert [p.name for p in paths] == ["report_dr_reduction.png"]
