"""Driving the experiment harness programmatically (or via the CLI).

Equivalent shell usage:

    curveflow operators --curve trillium --out /tmp/demo_ops
    curveflow validate --config demo.json
    curveflow simulate --config demo.json
    curveflow gamma --config demo.json
"""

import json

from curveflow.harness import run_experiment, resolve_config

config = {
    "experiment": "operators",
    "output_dir": "/tmp/demo_ops",
    "grid": {"n_points": 128},
    "curve": {"name": "trillium"},
}

print("resolved defaults:")
print(json.dumps(resolve_config(config), indent=2, sort_keys=True)[:400], "...")

summary, outdir = run_experiment(config)
print("\nsummary:", json.dumps(summary, indent=2, sort_keys=True))
print("artifacts in:", outdir)

gamma_config = {
    "experiment": "gamma-convergence",
    "output_dir": "/tmp/demo_gamma",
    "grid": {"n_points": 1024},
    "curve": {"name": "trillium"},
    "gamma": {"epsilons": [0.08, 0.04], "transitions": [0.25, 0.75],
              "first_side_plus": True, "delta": 0.2},
}
summary, outdir = run_experiment(gamma_config)
print("\ngamma study fitted order:", summary["fitted_order"])
