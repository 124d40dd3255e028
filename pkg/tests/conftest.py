"""Shared pytest fixtures for stickyflows tests."""

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from stickyflows.covariance import gaussian, scaled
from stickyflows.db.schema import Base


@pytest.fixture
def engine():
    """Create an in-memory SQLite engine for testing."""
    engine = create_engine("sqlite:///:memory:", echo=False)
    Base.metadata.create_all(engine)
    return engine


@pytest.fixture
def session(engine):
    """Create a database session for testing."""
    Session = sessionmaker(bind=engine)
    session = Session()
    yield session
    session.close()


@pytest.fixture
def rng():
    """Fixed-seed generator so statistical assertions are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_model():
    """Gaussian covariance with a = 1."""
    return gaussian(1.0)


@pytest.fixture
def unit_scaled(unit_model):
    """Gaussian covariance at n = 1, b = 1."""
    return scaled(unit_model, 1, 1.0)
