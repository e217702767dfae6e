"""Command line tour
=================

The same computations through the ``homfib`` entry point.
"""

from pathlib import Path

from homfib.cli import main

specs = Path(__file__).resolve().parent.parent / "specs"
main(["homology", str(specs / "e0_2.json")])
main(["linking-form", str(specs / "e1_3_heegaard.json")])
main(["decide", str(specs / "e0_2.json"), "--fiber", "1,0", "--cert-dir", "-"])
main(["hc", str(specs / "s2s1x2_e1_3.json")])
