"""
Seeded synthetic genomic datasets.
r individuals with exactly x distinct keywords each: gender, ethnicity and phenotype
fields first, then SNP genotypes at distinct loci. A planted keyword can be given to
exactly alpha individuals for search benchmarks.
"""

import logging
from typing import List, Optional

import numpy as np

from .ingest import GenomicRecord

logger = logging.getLogger(__name__)

GENDERS = ("F", "M")
ETHNICITIES = ("African", "Asian", "European", "Hispanic", "Other")
PHENOTYPES = ("Hypertension", "Diabetes", "Asthma", "Obesity", "Healthy", "Migraine")
GENOTYPES = ("AA", "AC", "AG", "AT", "CC", "CG", "CT", "GG", "GT", "TT")

PLANTED_KEYWORD = "phenotype:PlantedTrait"


def generate_dataset(r: int, x: int, seed: int = 0, alpha: Optional[int] = None,
                     planted_keyword: str = PLANTED_KEYWORD,
                     snp_pool: Optional[int] = None) -> List[GenomicRecord]:
    if r < 1 or x < 1:
        raise ValueError("need at least one record and one keyword per record")
    if alpha is not None and not 0 <= alpha <= r:
        raise ValueError("alpha must lie in [0, r]")

    rng = np.random.default_rng(seed)
    snp_count = max(x - 3, 0)
    pool = max(snp_pool or 0, 2 * snp_count, 1000)
    planted = set()
    if alpha:
        planted = set(rng.choice(r, size=alpha, replace=False).tolist())

    records = []
    for index in range(r):
        keywords = [
            f"gender:{GENDERS[rng.integers(len(GENDERS))]}",
            f"ethnicity:{ETHNICITIES[rng.integers(len(ETHNICITIES))]}",
            f"phenotype:{PHENOTYPES[rng.integers(len(PHENOTYPES))]}",
        ][:x]
        if snp_count:
            loci = rng.choice(pool, size=snp_count, replace=False)
            genotypes = rng.integers(len(GENOTYPES), size=snp_count)
            keywords += [f"snp_rs{locus + 1}:{GENOTYPES[g]}" for locus, g in zip(loci, genotypes)]
        if index in planted:
            keywords[-1] = planted_keyword
        records.append(GenomicRecord(identifier=f"P{index:06d}", keywords=keywords))

    logger.info(f"Generated {r} synthetic records with {x} keywords each (seed {seed})")
    return records
