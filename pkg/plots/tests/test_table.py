from eovplots.summary import load_summary
from eovplots.table import format_table


def test_layout_rows_are_blocks_columns_are_delays(synthetic_csv):
    table = format_table(load_summary(synthetic_csv))
    lines = table.splitlines()
    header = lines[0].split()
    assert header == ["block", "0ms", "2000ms", "3500ms"]
    assert [line.split()[0] for line in lines[1:]] == ["1", "10", "97"]


def test_cells_verbatim(synthetic_csv):
    summary = load_summary(synthetic_csv)
    table = format_table(summary)
    rows = {line.split()[0]: line.split() for line in table.splitlines()[1:]}
    assert rows["1"][1:] == ["10.85", "4056", "8778"]
    assert rows["97"][1:] == ["10.85", "28674", "126680"]


def test_missing_cells_marked(halted_csv):
    table = format_table(load_summary(halted_csv))
    rows = {line.split()[0]: line.split() for line in table.splitlines()[1:]}
    assert rows["10"] == ["10", "10.85", "-"]
    assert rows["97"] == ["97", "10.85", "-"]
    assert rows["1"] == ["1", "10.85", "9650"]
