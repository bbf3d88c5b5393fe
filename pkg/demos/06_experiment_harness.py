"""Replicated experiments from a config, with CSV output.

The same run is available from the command line:

    tensorbandits simulate --config configs/paper_linear.json --threads 2
"""

import tempfile
from pathlib import Path

from tensorbandits import ExperimentConfig, read_aggregate_csv, run_experiment

cfg = ExperimentConfig.from_dict(
    dict(
        d1=6, d2=6, d3=2, r=1, n_arms=30, family="logistic", normalize=False,
        T=400, replications=4, base_seed=0,
        policies=[
            {"name": "g_lowtestr", "params": {"T1": 60, "c_lambda": 0.5, "alpha_scale": 0.1}},
            {"name": "glm_ucb", "params": {"alpha_scale": 0.1}},
            {"name": "uniform_random"},
        ],
    )
)

with tempfile.TemporaryDirectory() as tmp:
    cfg.output_dir = tmp
    summary = run_experiment(cfg, threads=2)
    print(summary.final_table())
    agg = read_aggregate_csv(Path(tmp) / "aggregate.csv")
    for policy, (mean, std, n) in agg.items():
        print(f"{policy:>15}: regret at t=100 {mean[99]:.2f} +- {std[99]:.2f} over {n} runs")
    print("files:", sorted(p.name for p in Path(tmp).iterdir()))
