#!/usr/bin/env python3
"""Regenerate the bundled data files from the builders.

Scenario .scif files must stay byte-identical to the builders' pretty-prints
(there is a test for it); golden witnesses are the deterministic explore
outputs for the two reachability results.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from picsif import scenarios
from picsif.explorer import SearchConfig, explore, witness_lines
from picsif.surface import pretty

ROOT = pathlib.Path(__file__).resolve().parent.parent / "src" / "picsif" / "data"


def main():
    scen_dir = ROOT / "scenarios"
    gold_dir = ROOT / "golden"
    scen_dir.mkdir(parents=True, exist_ok=True)
    gold_dir.mkdir(parents=True, exist_ok=True)

    for name, bundle in scenarios.bundles().items():
        (scen_dir / f"{name}.scif").write_text(bundle.scif, encoding="utf-8")
        print(f"wrote scenarios/{name}.scif")
    (scen_dir / "paper-actors.scif").write_text(
        pretty(scenarios.paper_actors_file()), encoding="utf-8")
    print("wrote scenarios/paper-actors.scif")

    bundle = scenarios.signalgate_scenario()
    for target in ("auth-z", "auth-n"):
        result = explore(bundle, SearchConfig(max_depth=12, target=target))
        assert result.found, f"{target} not found"
        path = gold_dir / f"signalgate-{target}.witness"
        path.write_text(witness_lines(result.witness), encoding="utf-8")
        print(f"wrote golden/signalgate-{target}.witness "
              f"(depth {result.witness.depth}, {result.states_visited} states)")

    script = scenarios.deletion_script()
    (gold_dir / "signalgate-delete.script").write_text(
        "\n".join(script) + "\n", encoding="utf-8")
    print("wrote golden/signalgate-delete.script")


if __name__ == "__main__":
    main()
