from pathlib import Path

import pytest
from hypothesis import settings

from nego.dsl import load_software_model, parse_contract
from nego.model import Configuration, SystemModel, parse_configuration, parse_platform

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS


@pytest.fixture(scope="session")
def software_pre():
    texts = [p.read_text() for p in sorted((CORPUS / "contracts").glob("*.contract"))]
    return load_software_model(texts, (CORPUS / "services.repo").read_text())


@pytest.fixture(scope="session")
def software_post():
    texts = [p.read_text() for p in sorted((CORPUS / "contracts").glob("*.contract"))]
    texts.append((CORPUS / "updates" / "S.contract").read_text())
    texts.append((CORPUS / "updates" / "L.contract").read_text())
    return load_software_model(texts, (CORPUS / "services.repo").read_text())


@pytest.fixture(scope="session")
def platform():
    return parse_platform((CORPUS / "platform.txt").read_text())


@pytest.fixture(scope="session")
def current_config():
    return parse_configuration((CORPUS / "current.config").read_text())


@pytest.fixture(scope="session")
def system_pre(software_pre, platform, current_config):
    return SystemModel(software_pre, platform, current_config)


@pytest.fixture(scope="session")
def update_requests():
    from nego.model import UpdateRequest

    return [
        UpdateRequest.add(parse_contract((CORPUS / "updates" / "S.contract").read_text())),
        UpdateRequest.add(parse_contract((CORPUS / "updates" / "L.contract").read_text())),
    ]


POST_SELECTED = frozenset({"L", "O1", "O2", "P", "S", "T"})

CONNS_LANE_ON_O1 = frozenset({
    ("L", "object_masking", "O2"),
    ("L", "object_recognition", "O1"),
    ("L", "steering", "S"),
    ("P", "trajectory_calculation", "T"),
    ("T", "object_recognition", "O2"),
})

CONNS_LANE_ON_O2 = frozenset({
    ("L", "object_masking", "O2"),
    ("L", "object_recognition", "O2"),
    ("L", "steering", "S"),
    ("P", "trajectory_calculation", "T"),
    ("T", "object_recognition", "O1"),
})

POST_MAPPING = {
    ("L", "la1"): "CPU1",
    ("L", "la2"): "CPU1",
    ("L", "la3"): "CPU1",
    ("L", "la4"): "CPU1",
    ("O1", "or1"): "CPU1",
    ("O2", "om"): "CPU1",
    ("O2", "or2"): "CPU1",
    ("P", "p1"): "CPU1",
    ("P", "p2"): "CPU1",
    ("S", "s"): "CPU1",
    ("T", "tc1"): "CPU1",
    ("T", "tc2"): "CPU1",
    ("T", "tci"): "CPU1",
}

LEX_ORDER = (
    ("L", "lane_assist"),
    ("O1", "object_recognition_get"),
    ("O2", "object_masking_get"),
    ("O2", "object_recognition_get"),
    ("P", "init"),
    ("P", "park_assist"),
    ("S", "steering_setAngle"),
    ("T", "trajectory_calculation_get"),
    ("T", "trajectory_calculation_init"),
)

ACCEPTED_ORDER = (
    ("L", "lane_assist"),
    ("O2", "object_masking_get"),
    ("O2", "object_recognition_get"),
    ("S", "steering_setAngle"),
    ("O1", "object_recognition_get"),
    ("P", "park_assist"),
    ("T", "trajectory_calculation_get"),
    ("P", "init"),
    ("T", "trajectory_calculation_init"),
)


@pytest.fixture(scope="session")
def cfg_lane_on_o1():
    return Configuration(POST_SELECTED, CONNS_LANE_ON_O1, POST_MAPPING, LEX_ORDER)


@pytest.fixture(scope="session")
def cfg_lane_on_o2_lex():
    return Configuration(POST_SELECTED, CONNS_LANE_ON_O2, POST_MAPPING, LEX_ORDER)


@pytest.fixture(scope="session")
def cfg_accepted():
    return Configuration(POST_SELECTED, CONNS_LANE_ON_O2, POST_MAPPING, ACCEPTED_ORDER)
