"""Shared fixtures: the bundled students example and its capacity."""

from importlib import resources

import pytest

from capid import load_capacity_json, matrix_from_csv


def _data_path(name: str):
    return resources.files("capid") / "data" / name


@pytest.fixture(scope="session")
def students_csv():
    return str(_data_path("students.csv"))


@pytest.fixture(scope="session")
def students_capacity_json():
    return str(_data_path("students_capacity.json"))


@pytest.fixture(scope="session")
def students_matrix(students_csv):
    return matrix_from_csv(students_csv)


@pytest.fixture(scope="session")
def students_capacity(students_capacity_json):
    return load_capacity_json(students_capacity_json)
