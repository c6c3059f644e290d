import os
import json
import logging
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

import pandas as pd

from pyfekete.utils import CSV_FLOAT_FORMAT, VERSION

MANIFEST_SUFFIX = '.manifest.json'


@dataclass
class ExperimentManifest:
    """Everything needed to re-run a command and reproduce its output files."""
    command: str
    parameters: Dict[str, Any]
    tool_version: str = VERSION
    wall_time: Optional[float] = None
    outputs: List[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path: str) -> 'ExperimentManifest':
        with open(path, 'r', encoding='utf-8') as file:
            data = json.load(file)
        missing = {"command", "parameters"} - set(data)
        if missing:
            raise ValueError(f"Manifest {path} lacks fields {sorted(missing)}")
        return cls(**data)


class ResultWriter:
    """Writes experiment outputs next to their manifests."""

    def _prepare(self, path: str) -> str:
        directory = os.path.dirname(path)
        if directory and not os.path.isdir(directory):
            os.makedirs(directory, exist_ok=True)
            logging.info(f"Created directory `{directory}`")
        return path

    def store_frame(self, frame: pd.DataFrame, path: str) -> str:
        self._prepare(path)
        if path.endswith('.parquet'):
            frame.to_parquet(path, engine='fastparquet', index=False)
        else:
            frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT,
                         lineterminator='\n', encoding='utf-8')
        logging.info(f"File saved at '{path}'")
        return path

    def store_json(self, payload: Any, path: str) -> str:
        return self.store_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", path)

    def store_text(self, text: str, path: str) -> str:
        self._prepare(path)
        with open(path, 'w', encoding='utf-8', newline='\n') as file:
            file.write(text)
        logging.info(f"File saved at '{path}'")
        return path

    def store_manifest(self, manifest: ExperimentManifest, output_path: str) -> str:
        path = output_path + MANIFEST_SUFFIX
        with open(path, 'w', encoding='utf-8', newline='\n') as file:
            file.write(manifest.to_json())
        return path
