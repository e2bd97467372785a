"""End-to-end checks against real simulator output, plus the release
criterion for this package: the growth chart shows the flat-then-rising
knee and the table reproduces the summary verbatim."""

import csv

from eovplots.charts import slope_points
from eovplots.cli import main
from eovplots.summary import load_summary
from eovplots.table import format_table


class TestCliOnRealSweep:
    def test_offsets_chart(self, sweep_csv, tmp_path, capsys):
        out = tmp_path / "offsets.svg"
        assert main(["offsets", "--in", str(sweep_csv), "--out", str(out)]) == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_slope_chart(self, sweep_csv, tmp_path):
        out = tmp_path / "slope.svg"
        assert main(["slope", "--in", str(sweep_csv), "--out", str(out)]) == 0
        assert out.exists()

    def test_table_prints(self, sweep_csv, capsys):
        assert main(["table", "--in", str(sweep_csv)]) == 0
        table = capsys.readouterr().out
        assert table.splitlines()[0].split() == [
            "block", "0ms", "1000ms", "2000ms", "2500ms", "3000ms", "3500ms",
        ]

    def test_schema_mismatch_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1,2\n")
        assert main(["table", "--in", str(bad)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_slope_on_single_delay_exits_nonzero(self, tmp_path, capsys):
        one = tmp_path / "one.csv"
        one.write_text("delay_ms,block_index,mean_offset_ms,runs\n0,1,0,1\n0,97,0,1\n")
        assert main(["slope", "--in", str(one), "--out", str(tmp_path / "s.svg")]) == 1


class TestAcceptanceSecondary:
    def test_criterion_10_knee_and_verbatim_table(self, sweep_csv, capsys):
        summary = load_summary(sweep_csv)
        points = dict(slope_points(summary))

        # Flat side of the knee, then monotone growth.
        for d in (0.0, 1000.0):
            assert points[d] <= 5.0, f"d={d}: slope {points[d]:.2f}"
        rising = [points[d] for d in (1000.0, 2000.0, 2500.0, 3000.0, 3500.0)]
        assert all(b > a for a, b in zip(rising, rising[1:]))

        # Table cells reproduce the CSV byte for byte, in table layout.
        table = format_table(summary)
        lines = {line.split()[0]: line.split() for line in table.splitlines()}
        delays = summary.delays
        with open(sweep_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                cells = lines[row["block_index"]]
                assert cells[1 + delays.index(row["delay_ms"])] == row["mean_offset_ms"]
        print(
            "\nACCEPTANCE 10: PASS - growth chart flat through 1000 ms then monotone rising; "
            "table matches the summary CSV verbatim"
        )
