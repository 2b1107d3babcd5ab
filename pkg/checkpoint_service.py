import os
from abc import ABC, abstractmethod
import logging
import json
import threading
from thread_safe_writer import ThreadSafeWriter


class AbstractCheckpointKeySet(ABC):
    """Abstract base class for checkpoint read and write."""

    @abstractmethod
    def write(self, key):
        """Writes key into checkpoint file."""
        pass

    @abstractmethod
    def contains(self, key):
        """Checks if key exists in checkpoint"""
        pass


class AbstractCheckpointKeyMap(ABC):
    """Keys with JSON-serializable values, e.g. one bench record per grid."""

    @abstractmethod
    def write(self, key, value):
        pass

    @abstractmethod
    def contains(self, key):
        pass

    @abstractmethod
    def get(self, key):
        pass


class CheckpointKeySet(AbstractCheckpointKeySet):
    """Set of completed keys, one per line in the checkpoint file."""

    def __init__(self, checkpoint_file):
        self._checkpoint_file = checkpoint_file
        self._checkpoint_key_set = set()
        self._restore_from_checkpoint_file()
        self._checkpoint_file_append_fp = ThreadSafeWriter(checkpoint_file, 'a')

    def write(self, key):
        """Persists key. Only call this after the work the key stands for has been saved."""
        if key not in self._checkpoint_key_set:
            self._checkpoint_key_set.add(key)
            self._checkpoint_file_append_fp.write_line(key)

    def contains(self, key):
        exists = key in self._checkpoint_key_set
        if exists:
            logging.info(f"{key} found in checkpoint")
        return exists

    def _restore_from_checkpoint_file(self):
        if os.path.exists(self._checkpoint_file):
            with open(self._checkpoint_file, 'r', encoding='utf-8') as read_fp:
                for key in read_fp:
                    if key.strip():
                        self._checkpoint_key_set.add(key.rstrip('\n'))

    def __del__(self):
        if hasattr(self, '_checkpoint_file_append_fp'):
            self._checkpoint_file_append_fp.close()


class CheckpointKeyMap(AbstractCheckpointKeyMap):
    """Like CheckpointKeySet but also keeps a JSON value per key; a later write of the same key wins."""

    def __init__(self, checkpoint_file):
        self._checkpoint_file = checkpoint_file
        self._checkpoint_key_map = {}
        self._restore_from_checkpoint_file()
        self._checkpoint_file_append_fp = ThreadSafeWriter(checkpoint_file, 'a')

    def write(self, key, value):
        self._checkpoint_key_map[str(key)] = value
        self._checkpoint_file_append_fp.write_line(json.dumps({"key": str(key), "value": value}))

    def contains(self, key):
        exists = str(key) in self._checkpoint_key_map
        if exists:
            logging.info(f"{key} found in checkpoint")
        return exists

    def get(self, key):
        return self._checkpoint_key_map[str(key)]

    def _restore_from_checkpoint_file(self):
        if not os.path.exists(self._checkpoint_file):
            return
        with open(self._checkpoint_file, 'r', encoding='utf-8') as read_fp:
            for line_number, line in enumerate(read_fp, 1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    logging.warning(f"Ignoring corrupt line {line_number} of {self._checkpoint_file}")
                    continue
                self._checkpoint_key_map[entry["key"]] = entry["value"]

    def __del__(self):
        if hasattr(self, '_checkpoint_file_append_fp'):
            self._checkpoint_file_append_fp.close()


class DisabledCheckpointKeySet(AbstractCheckpointKeySet):
    """Class used to denote disabled checkpointing."""

    def write(self, key):
        pass

    def contains(self, key):
        return False


class InMemoryKeyMap(AbstractCheckpointKeyMap):
    """Key map used when checkpointing is disabled: values live for one run only."""

    def __init__(self):
        self._lock = threading.Lock()
        self._key_map = {}

    def write(self, key, value):
        with self._lock:
            self._key_map[str(key)] = value

    def contains(self, key):
        return str(key) in self._key_map

    def get(self, key):
        return self._key_map[str(key)]


class CheckpointService():
    """
    Hands out checkpoint key sets and maps per (action, object) pair so an interrupted bench
    session can be resumed where it left off.
    """

    def __init__(self, configs):
        self._checkpoint_enabled = configs['use_checkpoint']
        self._checkpoint_dir = os.path.join(configs['session_dir'], "checkpoint")
        self._key_maps = {}
        if self._checkpoint_enabled:
            os.makedirs(self._checkpoint_dir, exist_ok=True)

    def _get_checkpoint_file(self, action_type, object_type):
        return os.path.join(self._checkpoint_dir, f"{action_type}_{object_type}.log")

    def get_checkpoint_key_set(self, action_type, object_type):
        if self._checkpoint_enabled:
            return CheckpointKeySet(self._get_checkpoint_file(action_type, object_type))
        return DisabledCheckpointKeySet()

    def get_checkpoint_key_map(self, action_type, object_type):
        """Returns the same map object for repeated calls so tasks of one run can share values."""
        key = (action_type, object_type)
        if key not in self._key_maps:
            if self._checkpoint_enabled:
                self._key_maps[key] = CheckpointKeyMap(self._get_checkpoint_file(action_type, object_type))
            else:
                self._key_maps[key] = InMemoryKeyMap()
        return self._key_maps[key]
