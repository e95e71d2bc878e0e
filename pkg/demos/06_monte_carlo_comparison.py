"""
Monte Carlo comparison
======================

A certified small run of the full pipeline: every solve is exact. Swap
``small_config()`` for ``ExperimentConfig()`` to run the full n = 30 study
(a few minutes on one core).
"""
import tempfile

from stqpcc.experiment import run_experiment, small_config

out = tempfile.mkdtemp(prefix="stqpcc_")
report = run_experiment(small_config(output_dir=out))
s = report.summary
print("outputs in", out)
print("crossover alpha, nominal / empirical:", s["crossover_alpha_nominal"], "/", s["crossover_alpha_empirical"])
print("mean |coverage - alpha|:", round(s["coverage"]["mean_abs_deviation"], 4))
print("solver status:", s["solver_status"])
for row in report.aggregates[::10]:
    print("alpha %.2f  cce error (nom) %.4f  robust error (nom) %.4f"
          % (row["alpha"], row["abs_err_nom_cce"], row["abs_err_nom_rob"]))
