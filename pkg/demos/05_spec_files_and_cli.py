"""Spec files and the command-line front end.

One JSON document declares a base, charts, bundles, forms and tasks; the
same runner backs the CLI subcommands.  Machine-format reports are
byte-identical for a fixed seed.

Run:  python3 demos/05_spec_files_and_cli.py
Then try the CLI directly:

    bundleforms operate demos/specs/moebius.json --samples 500
    bundleforms report demos/specs/moebius.json --format machine
    bundleforms homotopy demos/specs/moebius_cylinder.json --bundle moebius_cyl
"""

from pathlib import Path

from bundleforms import SamplePlan, parse_spec
from bundleforms.cli import run_tasks

SPEC = Path(__file__).resolve().parent / "specs" / "moebius.json"

doc = parse_spec(SPEC.read_text())
print("bundles:", sorted(doc.bundles))
print("forms:", sorted(doc.forms))
print("tasks:", [t["op"] for t in doc.tasks])

plan = SamplePlan(seed=0, n_chart=400, n_overlap=250, n_triple=120)
report = run_tasks(doc, doc.tasks, plan)
print()
print(report.human_text())

# The machine rendering drops timings and sorts keys, so it is stable:
again = run_tasks(parse_spec(SPEC.read_text()), doc.tasks, plan)
print("byte-identical machine reports:",
      report.machine_text() == again.machine_text())
