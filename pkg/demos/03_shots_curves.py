"""Best-found accuracy as a function of measurement budget, through the
command-line runner so the CSV artifacts and run manifests are on display.

Two experiments:
  1. simplified edge task, one dataset copy, doubling budgets 1..128;
  2. edge task, four copies vs uniform random search, racing to 98% test
     accuracy.

Every run writes shots_curve.csv plus run_manifest.json into demo_out/ and
is byte-reproducible under the same seed.
"""

import pathlib

from grovertrain import cli


def show(path):
    print(f"--- {path} ---")
    print(path.read_text(), end="")


def main():
    out = pathlib.Path("demo_out")

    sed_dir = out / "sed_curve"
    cli.main(["shots-curve", "--task", "simplified-ed", "--k", "1",
              "--runs", "20", "--seed", "0", "--out", str(sed_dir)])
    show(sed_dir / "shots_curve.csv")

    kpd_dir = out / "edge_k4"
    urs_dir = out / "edge_urs"
    cli.main(["shots-curve", "--task", "edge", "--k", "4",
              "--budget", "5,10,15,20,30,40,60", "--runs", "20",
              "--seed", "0", "--out", str(kpd_dir)])
    cli.main(["shots-curve", "--task", "edge", "--method", "urs",
              "--budget", "50,100,200,400,900", "--runs", "20",
              "--seed", "0", "--out", str(urs_dir)])
    show(kpd_dir / "shots_curve.csv")
    show(urs_dir / "shots_curve.csv")

    print("\nreading the race: with four entangled dataset copies the mean "
          "test accuracy clears 98% within a couple dozen measurements; "
          "uniform random search needs several hundred to get close.")


if __name__ == "__main__":
    main()
