"""
Task: Datagen
Writes a synthetic Friedman or Gaussian spheres sample as CSV.
"""
from oob_forest.datagen import generate, write_csv
from oob_forest.models import GeneratorSpec, RunConfig
from oob_forest.utils.logger import logger


def cmd_datagen(config: RunConfig) -> str:
    spec = GeneratorSpec(process=config.process, n=config.n, seed=config.seed)
    data = generate(spec)
    path = write_csv(data, config.out)
    logger.info(f"[datagen] {spec.process}: {data.n} rows x {data.p} predictors -> {path}")
    print(path)
    return path
