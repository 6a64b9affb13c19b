"""Sample shift files bundled as package data"""
import logging
from pathlib import Path
from typing import List

from shiftlab.cli import load_spec_file
from shiftlab.interface import SpecFile
from shiftlab.interface import SpecificationError

logger = logging.getLogger(__name__)

FIXTURE_DIR = Path(__file__).parent
SUFFIX = ".shift"


def fixture_names() -> List[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob(f"*{SUFFIX}"))


def fixture_path(name: str) -> Path:
    path = Path(FIXTURE_DIR, name + SUFFIX)
    if not path.is_file():
        raise SpecificationError(
            f"unknown fixture {name!r}, choose one of {', '.join(fixture_names())}"
        )
    return path


def load_fixture(name: str) -> SpecFile:
    path = fixture_path(name)
    logger.debug("Loading fixture %s from %s", name, path)
    return load_spec_file(path)
