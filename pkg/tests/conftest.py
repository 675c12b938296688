import datetime as dt

import numpy as np
import pytest

from volkit import GarchParams, InnovationSpec, Family, Model


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def make_price_csv(path, dates, closes, date_col="date", price_col="close"):
    lines = [f"{date_col},{price_col}"]
    lines += [f"{d},{c}" for d, c in zip(dates, closes)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def daily_dates(n, start=dt.date(2014, 1, 1)):
    return [(start + dt.timedelta(days=i)).isoformat() for i in range(n)]


SPEC_T5 = InnovationSpec(Family.STUDENT_T, 5.0)
SPEC_GED = InnovationSpec(Family.GED, 1.4)
SPEC_NIG = InnovationSpec(Family.NIG, 1.5, -0.4)


def cell_truth(model: Model, family: Family) -> GarchParams:
    """Feasible data-generating parameters for one model/distribution cell."""
    spec = {
        Family.STUDENT_T: InnovationSpec(Family.STUDENT_T, 5.0),
        Family.GED: InnovationSpec(Family.GED, 1.4),
        Family.NIG: InnovationSpec(Family.NIG, 1.5, -0.4),
    }[family]
    if model is Model.SGARCH:
        return GarchParams(model, 0.05, 0.10, 0.85, spec)
    if model is Model.IGARCH:
        return GarchParams.igarch(0.02, 0.85, spec)
    return GarchParams(model, 0.05, 0.05, 0.80, spec, 0.15)
