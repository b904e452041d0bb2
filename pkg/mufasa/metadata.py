"""Run metadata support

Records what produced the files in an output directory: command, validated
configuration hash, seed, variant, artifact version and stage timings.

:license: Apache License, Version 2.0, see LICENSE for details.
"""

from datetime import datetime
from pathlib import Path
from typing import Optional, Union

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap

from mufasa.fsops import mkdir_p
from mufasa.git_utils import artifact_version
from mufasa.manifest import write_manifest

# Metadata file field names
COMMAND_FIELD = "command"
CONFIG_HASH_FIELD = "config_hash"
SEED_FIELD = "seed"
VARIANT_FIELD = "variant"
VERSION_FIELD = "version"
CREATED_FIELD = "created"
TIMINGS_FIELD = "timings"
METADATA_FILENAME = "metadata.yaml"


class RunMetadata:
    """
    Metadata of one command run

    Parameters:
        output_path : Path
            Directory the command writes into
        command : str
            Subcommand name
        config : RunConfig
            Validated run configuration
        version : Optional[str]
            Artifact version. Defaults to `git describe` of the source
            checkout
    """

    def __init__(self,
                 output_path: Union[Path, str],
                 command: str,
                 config,
                 version: Optional[str] = None) -> None:
        self.output_path = Path(output_path)
        self.filepath = self.output_path / METADATA_FILENAME
        self.command = command
        self.config = config
        self.version = artifact_version() if version is None else version
        self.timings = {}

    def as_map(self) -> CommentedMap:
        metadata = CommentedMap()
        metadata[COMMAND_FIELD] = self.command
        metadata[CONFIG_HASH_FIELD] = self.config.hash()
        metadata[SEED_FIELD] = self.config.seed
        metadata[VARIANT_FIELD] = self.config.variant
        metadata[VERSION_FIELD] = self.version
        metadata[CREATED_FIELD] = datetime.now().strftime('%Y-%m-%d')
        if self.timings:
            metadata[TIMINGS_FIELD] = {
                name: round(float(value), 6)
                for name, value in self.timings.items()
            }
        return metadata

    def write(self) -> Path:
        """Write metadata.yaml into the output directory"""
        mkdir_p(self.output_path)
        YAML().dump(self.as_map(), self.filepath)
        return self.filepath


def read_metadata(output_path: Union[Path, str]) -> CommentedMap:
    filepath = Path(output_path) / METADATA_FILENAME
    if not filepath.exists():
        return CommentedMap()
    return YAML().load(filepath)


def record_run(output_path: Union[Path, str], command: str, config,
               timings: Optional[dict] = None) -> RunMetadata:
    """Write the metadata and artifact manifest of a finished command"""
    metadata = RunMetadata(output_path, command, config)
    metadata.timings.update(timings or {})
    metadata.write()
    write_manifest(output_path)
    return metadata
