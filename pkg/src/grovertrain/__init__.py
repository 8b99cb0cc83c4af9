"""Gradient-free training of Boolean reversible models by amplitude
amplification, simulated two ways: a closed-form evolution over exact
accuracy tables and a dense statevector simulator, which must agree.

Modules:
    boolcirc  Boolean circuit IR, bit-parallel weight sweeps, reversible
              compilation to X/CNOT/multi-controlled-X gates.
    datasets  Basis-encoded datasets: line-image tasks, IDX ingestion,
              3x3 downsampling, correctness predicates.
    amplify   Amplification planning (angle, iterations, padding), the
              closed-form evolved weight distribution, sampling and
              shot-based evaluation, search drivers.
    statevec  Dense statevector simulation of the same pipeline.
    theory    Query-count calculators and the best-parallel-copies rule
              with its brute-force validator.
    tasks     Named model+dataset bundles with fixed splits.
    cli       Experiment runner (entry point: grovertrain).
"""

__version__ = "0.1.0"

from . import amplify, boolcirc, datasets, statevec, tasks, theory
from .amplify import (AccuracyTable, DegenerateAngleError, ExperimentConfig,
                      GroverPlan, OptimizeResult, WeightDistribution,
                      accuracy_table, evolve_distribution, grover_iterations,
                      make_plan, optimize, pad_auxiliary, sample_weights,
                      theta_exact, theta_shots, uniform_random_search)
from .boolcirc import (Gate, GateList, ModelCircuit, RGate, compile_circuit,
                       edge_detection_model, eval_all_weights, eval_circuit,
                       parse_circuit, serialize_circuit, simplified_ed_model,
                       tiny_mnist_model, toy_xor_model)
from .datasets import (Dataset, Sample, gen_edge_detection, gen_simplified_ed,
                       make_tiny_mnist, parse_idx, split, write_idx)
from .statevec import (QuantumState, apply_diffusion, apply_oracle,
                       grover_run, prepare_initial)
from .tasks import TaskBundle, load_task
from .theory import (alpha_beta, brute_force_optimal_k, epsilon_optimal_set,
                     optimal_k, queries_1pd, queries_kpd)
