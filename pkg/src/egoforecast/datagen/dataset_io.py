"""Dataset files: one JSON manifest line, then one record per line.

A record line is the sample id, the source seed, and every array field
flattened in the manifest's declared field order, space-separated.
Values are written with 17 significant digits, which round-trips 64-bit
reals exactly, so write -> read -> write is byte-identical.
"""
import numpy as np

from .samples import DatasetManifest, TrajectorySample


class DatasetError(Exception):
    """Dataset file and manifest disagree, or the file is malformed."""


def _flatten_record(sample, manifest):
    parts = [sample.sample_id, str(int(sample.source_seed))]
    dims = manifest.dims()
    for name in manifest.FIELD_ORDER:
        arr = np.asarray(getattr(sample, name), dtype=np.float64)
        want = tuple(dims[name])
        if arr.shape != want:
            raise DatasetError(
                "sample %s: field %s has shape %r, manifest declares %r"
                % (sample.sample_id, name, arr.shape, want))
        parts.append(" ".join(np.char.mod("%.17g", arr.reshape(-1))))
    return " ".join(parts)


def write_dataset(samples, manifest, path):
    if manifest.sample_count != len(samples):
        raise DatasetError(
            "manifest declares %d samples but %d were given"
            % (manifest.sample_count, len(samples)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
        fh.write("\n")
        for sample in samples:
            fh.write(_flatten_record(sample, manifest))
            fh.write("\n")


def read_dataset(path):
    """Parse and validate a dataset file -> (samples, manifest)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise DatasetError("empty file, no manifest line")
        try:
            manifest = DatasetManifest.from_json(header)
        except (ValueError, KeyError) as exc:
            raise DatasetError("unparseable manifest line: %s" % exc)
        dims = manifest.dims()
        field_sizes = [
            (name, tuple(dims[name]), int(np.prod(dims[name])))
            for name in manifest.FIELD_ORDER
        ]
        total = sum(n for _, _, n in field_sizes)

        samples = []
        for idx in range(manifest.sample_count):
            line = fh.readline()
            if not line.strip():
                raise DatasetError(
                    "truncated file: manifest declares %d records, found %d"
                    % (manifest.sample_count, idx))
            tokens = line.split()
            if len(tokens) != 2 + total:
                raise DatasetError(
                    "record %d: %d values, manifest dimension table needs %d"
                    % (idx, len(tokens) - 2, total))
            sample_id = tokens[0]
            try:
                seed = int(tokens[1])
                values = np.array(tokens[2:], dtype=np.float64)
            except ValueError as exc:
                raise DatasetError("record %d: %s" % (idx, exc))
            fields = {}
            offset = 0
            for name, shape, n in field_sizes:
                fields[name] = values[offset:offset + n].reshape(shape)
                offset += n
            samples.append(TrajectorySample(
                sample_id=sample_id, source_seed=seed, **fields))
        extra = fh.readline()
        if extra.strip():
            raise DatasetError(
                "file has more records than the manifest count %d"
                % manifest.sample_count)
    return samples, manifest
