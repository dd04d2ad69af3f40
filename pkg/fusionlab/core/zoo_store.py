"""
Zoo store - the persisted zoo directory.

One canonical JSON file per member plus index.json; every file is replaced
atomically, so an interrupted build leaves the previous zoo readable.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from .codec import (
    atomic_write,
    census_to_model,
    dumps,
    load_modular,
    modular_to_model,
    read_json,
    spec_from_json,
)
from .construct import ZooEntry, ZooLimits, build_from_spec
from .errors import SpecError
from .modular import is_nondegenerate
from .schemas import ZooIndex, ZooIndexEntry

logger = logging.getLogger(__name__)

INDEX_FILE = "index.json"


class ZooStore:
    """
    Manages the persisted zoo.

    Args:
        zoo_dir: directory of the store; defaults to the configured zoo directory.
    """

    def __init__(self, zoo_dir: Optional[str] = None):
        if zoo_dir is None:
            from ..config_manager import get_config_manager
            zoo_dir = str(get_config_manager().zoo_dir)
        self.zoo_dir = Path(zoo_dir)

    @property
    def index_file(self) -> Path:
        return self.zoo_dir / INDEX_FILE

    def exists(self) -> bool:
        return self.index_file.exists()

    def save(self, entries: List[ZooEntry]) -> ZooIndex:
        """Write every entry and then the index."""
        items = []
        for entry in sorted(entries, key=lambda e: e.id):
            file_name = f"{entry.id}.json"
            spec = entry.spec
            if entry.data is not None:
                model = modular_to_model(entry.data, spec)
                nondegenerate = is_nondegenerate(entry.data)
            else:
                model = census_to_model(entry.census, spec)
                nondegenerate = True
            atomic_write(self.zoo_dir / file_name, dumps(model))
            items.append(ZooIndexEntry(
                id=entry.id,
                file=file_name,
                family=entry.family,
                rank=entry.rank,
                fpdim=entry.fpdim,
                census_only=entry.census_only,
                nondegenerate=nondegenerate,
            ))
        index = ZooIndex(entries=items)
        atomic_write(self.index_file, dumps(index))
        logger.info("zoo: saved %d members to %s", len(items), self.zoo_dir)
        return index

    def load_index(self) -> ZooIndex:
        if not self.exists():
            raise SpecError(f"no zoo at {self.zoo_dir}; run 'fusionlab zoo build' first", path=str(self.zoo_dir))
        try:
            return ZooIndex.model_validate(read_json(self.index_file))
        except ValidationError as exc:
            raise SpecError(f"{self.index_file}: {exc.errors()[0]['msg']}", path=str(self.index_file)) from exc

    def load_entry(self, item: ZooIndexEntry, limits: ZooLimits = ZooLimits(),
                   cache: Optional[Dict[str, ZooEntry]] = None) -> ZooEntry:
        """
        Read one member back.

        Twisted doubles are rebuilt from their stored spec so the census and
        cocycle are available; every other member is read and re-validated.
        """
        path = self.zoo_dir / item.file
        data = read_json(path)
        if not isinstance(data, dict) or not data.get("spec"):
            raise SpecError(f"{path}: zoo member without a spec", path=str(path))
        spec = spec_from_json(data["spec"])
        if item.family == "twisted_double":
            return build_from_spec(spec, limits, cache)
        return ZooEntry(item.id, spec, data=load_modular(path))

    def load_entries(self, limits: ZooLimits = ZooLimits()) -> List[ZooEntry]:
        cache: Dict[str, ZooEntry] = {}
        return [self.load_entry(item, limits, cache) for item in self.load_index().entries]
