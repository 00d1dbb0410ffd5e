import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from eos_module import EosFamily, MixtureEos, PhaseEosSpec, calibrate_offsets  # noqa: E402
from state_module import RelaxationParams, make_mechanical_equilibrium  # noqa: E402

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
CANONICAL_P = 4.0


def polytropic_isothermal() -> MixtureEos:
    return MixtureEos(
        PhaseEosSpec(EosFamily.POLYTROPIC, K=1.0, gamma=2.0),
        PhaseEosSpec(EosFamily.ISOTHERMAL, cT2=1.0),
    )


def stiffened_polytropic() -> MixtureEos:
    return MixtureEos(
        PhaseEosSpec(EosFamily.STIFFENED, K=1.0, gamma=3.0, pInf=1.0),
        PhaseEosSpec(EosFamily.POLYTROPIC, K=1.0, gamma=1.4),
    )


def identical_phases() -> MixtureEos:
    spec = PhaseEosSpec(EosFamily.POLYTROPIC, K=1.0, gamma=2.0)
    return MixtureEos(spec, spec)


@pytest.fixture
def canonical_mix():
    return calibrate_offsets(polytropic_isothermal(), CANONICAL_P)


@pytest.fixture
def canonical_state(canonical_mix):
    # rho_1 = 2, rho_2 = 4, a_1^2 = 4, a_2^2 = 1, c = 1/3, rho = 3
    return make_mechanical_equilibrium(canonical_mix, CANONICAL_P, 0.5, 0.3)


@pytest.fixture
def stiff_mix():
    return calibrate_offsets(stiffened_polytropic(), 10.0)


@pytest.fixture
def relax():
    return RelaxationParams(tau_alpha=0.5, tau_c=2.0, zeta=3.0, enable_c=True)


@pytest.fixture
def config_dir():
    return CONFIG_DIR
