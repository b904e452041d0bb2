"""mufasa.manifest
   ===============

   Hash manifest of the files a command produced, using a subclassed
   yamanifest manifest class.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

# External
import os

from yamanifest.manifest import Manifest as YaManifest

from mufasa.fsops import mkdir_p

full_hashes = ['md5']

MANIFEST_DIR = 'manifest'
MANIFEST_FNAME = 'artifacts.yaml'

# Files whose content legitimately changes between identical runs
DEFAULT_IGNORE = ('metadata.yaml', 'bench.jsonl')


class ArtifactManifest(YaManifest):
    """Full hashes of the artifacts in one output directory"""

    def __init__(self, path, full_hashes=full_hashes, **kwargs):
        super().__init__(path=path, hashes=full_hashes, **kwargs)
        self.full_hashes = full_hashes

    @classmethod
    def for_output(cls, output_path):
        return cls(os.path.join(output_path, MANIFEST_DIR, MANIFEST_FNAME))

    def scan(self, output_path, ignore=DEFAULT_IGNORE):
        """Hash every file under ``output_path`` except the manifest
        directory and ignored names."""
        filepaths, fullpaths = [], []
        for root, dirs, files in os.walk(output_path):
            dirs[:] = sorted(d for d in dirs if d != MANIFEST_DIR)
            for fname in sorted(files):
                if fname in ignore:
                    continue
                fullpath = os.path.join(root, fname)
                filepaths.append(os.path.relpath(fullpath, output_path))
                fullpaths.append(fullpath)

        if filepaths:
            self.add(
                filepaths=filepaths,
                hashfn=self.full_hashes,
                force=True,
                fullpaths=fullpaths
            )
        return filepaths

    def write(self):
        mkdir_p(os.path.dirname(self.path))
        self.dump()

    def check_reproduce(self, previous_manifest):
        """Lines describing every artifact that differs from
        ``previous_manifest``; empty when the run reproduced."""
        all_filepaths = set(self.data) | set(previous_manifest.data)
        differences = []
        for filepath in sorted(all_filepaths):
            for hashfn in self.full_hashes:
                hash = self.get(filepath, hashfn)
                previous_hash = previous_manifest.get(filepath, hashfn)

                if hash is None:
                    differences.append(
                        f"  {filepath}: Missing file (file not in " +
                        "calculated manifest)"
                    )
                elif previous_hash is None:
                    differences.append(
                        f"  {filepath}: New file (file not in stored manifest)"
                    )
                elif hash != previous_hash:
                    differences.append(
                        f"  {filepath}: {hashfn}: {previous_hash} != {hash}"
                    )
        return differences


def write_manifest(output_path):
    """Hash the artifacts of ``output_path`` into its manifest file."""
    manifest = ArtifactManifest.for_output(output_path)
    manifest.scan(output_path)
    manifest.write()
    return manifest
