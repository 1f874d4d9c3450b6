"""Download the real datasets used by ``realdata`` into ``DATA_DIR`` as plain CSV."""

from __future__ import annotations

import argparse
import io
from pathlib import Path
from typing import Dict, Sequence

import httpx
import pandas as pd
from tenacity import RetryError, retry, stop_after_attempt, wait_fixed

from repmix import settings
from repmix.artifacts import FLOAT_FORMAT

GALAXY_URL = "https://vincentarelbundock.github.io/Rdatasets/csv/MASS/galaxies.csv"
USER_AGENT = "repulsive-mixtures/0.1"
# Velocities are stored in km/s; the experiments work in thousands of km/s.
GALAXY_SCALE = 1000.0


@retry(stop=stop_after_attempt(3), wait=wait_fixed(1))
def fetch(url: str) -> httpx.Response:
    with httpx.Client(timeout=httpx.Timeout(10.0), headers={"User-Agent": USER_AGENT}, follow_redirects=True) as client:
        response = client.get(url)
        response.raise_for_status()
        return response


def galaxy_frame(csv_text: str) -> pd.DataFrame:
    """Rdatasets layout: a row-name column followed by the velocity column."""

    frame = pd.read_csv(io.StringIO(csv_text))
    numeric = frame.select_dtypes("number")
    values = numeric.iloc[:, -1].to_numpy(dtype=float) / GALAXY_SCALE
    return pd.DataFrame({"y1": values})


def iris_frame() -> pd.DataFrame:
    from sklearn.datasets import load_iris

    iris = load_iris()
    frame = pd.DataFrame(iris.data, columns=[f"y{d + 1}" for d in range(iris.data.shape[1])])
    frame["label"] = iris.target
    return frame


def fetch_all(out_dir: Path) -> Dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}
    try:
        galaxy = galaxy_frame(fetch(GALAXY_URL).text)
    except (httpx.HTTPError, RetryError) as exc:
        print(f"Skipping galaxy: {exc}")
    else:
        written["galaxy"] = out_dir / "galaxy.csv"
        galaxy.to_csv(written["galaxy"], index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    written["iris"] = out_dir / "iris.csv"
    iris_frame().to_csv(written["iris"], index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return written


def main(args: Sequence[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Fetch the galaxy and iris datasets.")
    parser.add_argument("--out", type=Path, default=settings.DATA_DIR, help="Directory for the CSV files.")
    parsed = parser.parse_args(args=args)
    written = fetch_all(parsed.out)
    for name, path in written.items():
        print(f"Wrote {name} to {path}.")
    if not (parsed.out / "acidity.csv").exists():
        print(f"acidity is not redistributed; place it at {parsed.out / 'acidity.csv'} (one log-acidity value per row).")


if __name__ == "__main__":
    main()
