"""
Rendering and re-reading reports
================================

Reports come out as markdown tables for reading and as CSV or JSON for
storage. Stored reports parse back to the same object, and a bar-chart
data file can be written from either.
"""

import io

from qqgra.config import GroupSpec
from qqgra.gra import classify_influence, rank
from qqgra.report import FeatureRow, GraReport, emit_plot_data, parse_report, render_report

# %%
# Start from grades computed elsewhere. ``rank`` orders them, ties keeping
# their input order.
grades = [("url_count", 0.931183), ("follower_count", 0.970055), ("comment_count", 0.96664),
          ("wh_type_word_ratio", 0.902555), ("best_answer_latency_days", 0.929469)]
groups = GroupSpec()
rows = [FeatureRow(r.rank, r.name, r.grade, classify_influence(r.grade), groups.group_of(r.name))
        for r in rank(grades)]
report = GraReport(tuple(rows), metadata={"delta": 0.5})

print(render_report(report, "table"))

# %%
# CSV keeps grades at full precision, so the round trip is exact.
text = render_report(report, "csv")
print(text)
assert parse_report(text, "csv") == report

# %%
# Bar-chart data: one ``feature,grade`` row per feature, best first.
buf = io.StringIO()
emit_plot_data(report, buf)
print(buf.getvalue())
