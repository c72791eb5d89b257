"""
Instance IO Service - Single Responsibility: Read and write games, profiles and problem instances
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Optional, Union
import json
import logging

import pandas as pd

from ...domain.entities.game import FiniteGame, MixedProfile, NormalFormGame
from ...domain.entities.instances import CnfFormula, MbpInstance, TdmInstance
from ...domain.entities.scheduling_game import SchedulingGame
from ...domain.exceptions import InvalidInstanceError, SchemaError
from ...domain.value_objects.scalar import ArithmeticMode, format_scalar


logger = logging.getLogger(__name__)

Document = Dict[str, Any]


class IInstanceIOService(ABC):
    """Interface for file formats"""

    @abstractmethod
    def read_game(self, path: str) -> FiniteGame:
        """Normal-form or scheduling game from JSON"""
        pass

    @abstractmethod
    def write_game(self, g: FiniteGame, path: Optional[str] = None) -> str:
        """Serialize a game; returns the JSON text"""
        pass

    @abstractmethod
    def read_profile(self, path: str) -> MixedProfile:
        """Mixed profile from JSON"""
        pass

    @abstractmethod
    def read_cnf(self, path: str) -> CnfFormula:
        """DIMACS CNF formula"""
        pass

    @abstractmethod
    def read_tdm(self, path: str) -> TdmInstance:
        """3-dimensional matching text file"""
        pass

    @abstractmethod
    def read_mbp(self, path: str) -> MbpInstance:
        """Multibalanced partition JSON"""
        pass

    @abstractmethod
    def write_json(self, document: Mapping[str, Any], path: Optional[str] = None) -> str:
        """Dump a document; returns the JSON text"""
        pass


class JsonInstanceIOService(IInstanceIOService):
    """JSON documents plus the DIMACS and 3DM text formats"""

    def __init__(self, indent: int = 2):
        """
        Initialize IO service

        Args:
            indent: JSON indentation of written documents
        """
        self._indent = indent

    # Generic JSON

    def load_json(self, path: str) -> Document:
        with open(path, 'r', encoding='utf-8') as handle:
            try:
                document = json.load(handle)
            except json.JSONDecodeError as e:
                raise SchemaError(f"'{path}' is not valid JSON: {e}")
        if not isinstance(document, dict):
            raise SchemaError(f"'{path}' must hold a JSON object")
        return document

    def write_json(self, document: Mapping[str, Any], path: Optional[str] = None) -> str:
        text = json.dumps(document, indent=self._indent, ensure_ascii=False) + "\n"
        if path:
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(text)
            logger.info(f"Wrote {path}")
        return text

    @staticmethod
    def unwrap(data: Mapping[str, Any]) -> Mapping[str, Any]:
        """Payload of a CLI report envelope, or the document itself"""
        if "schema_version" in data and isinstance(data.get("result"), dict):
            return data["result"]
        return data

    # Games

    def game_to_dict(self, g: FiniteGame) -> Document:
        if isinstance(g, SchedulingGame):
            return g.export_to_dict()
        table = g.to_normal_form()
        for row in table.strategy_labels:
            if any(',' in label for label in row):
                raise SchemaError("Strategy labels must not contain commas")
        document: Document = {
            "players": table.n,
            "strategies": [list(row) for row in table.strategy_labels],
            "costs": {
                ",".join(table.label_profile(s)): [format_scalar(c) for c in vector]
                for s, vector in table.cost_items()
            },
        }
        if table.mode == ArithmeticMode.FLOAT:
            document["mode"] = "float"
        if table.player_labels != tuple(str(i) for i in range(table.n)):
            document["player_labels"] = list(table.player_labels)
        if table.name:
            document["name"] = table.name
        if table.maximization:
            document["maximization"] = True
        return document

    def game_from_dict(self, data: Mapping[str, Any]) -> FiniteGame:
        data = self.unwrap(data)
        if "omega" in data:
            return self._scheduling_from_dict(data)
        for key in ("strategies", "costs"):
            if key not in data:
                raise SchemaError(f"Game document needs a '{key}' field")
        strategies = data["strategies"]
        if not isinstance(strategies, list) or not all(isinstance(row, list) for row in strategies):
            raise SchemaError("'strategies' must be a list of label lists")
        players = data.get("players", len(strategies))
        if players != len(strategies):
            raise SchemaError(f"'players' is {players} but {len(strategies)} strategy lists were given")

        index = [{str(label): k for k, label in enumerate(row)} for row in strategies]
        mode = ArithmeticMode(data["mode"]) if "mode" in data else None
        costs = {}
        for key, vector in data["costs"].items():
            parts = [part.strip() for part in str(key).split(',')]
            if len(parts) != len(strategies):
                raise SchemaError(f"Cost key '{key}' names {len(parts)} strategies, expected {len(strategies)}")
            try:
                s = tuple(index[i][label] for i, label in enumerate(parts))
            except KeyError as e:
                raise SchemaError(f"Cost key '{key}' uses unknown strategy label {e}")
            if not isinstance(vector, list):
                raise SchemaError(f"Cost entry '{key}' must be a list")
            if mode == ArithmeticMode.FLOAT:
                vector = [float(c) if isinstance(c, (int, float)) else c for c in vector]
            costs[s] = vector
        game = NormalFormGame(
            strategies,
            costs,
            player_labels=data.get("player_labels"),
            name=data.get("name", ""),
            maximization=bool(data.get("maximization", False))
        )
        if mode is not None and game.mode != mode:
            game = game.in_mode(mode)
        return game

    def _scheduling_from_dict(self, data: Mapping[str, Any]) -> SchedulingGame:
        omega = data["omega"]
        game = SchedulingGame(
            omega,
            player_labels=data.get("players"),
            mode=ArithmeticMode(data.get("mode", "exact")),
            name=data.get("name", "")
        )
        for key, actual in (("n", game.n), ("m", game.m)):
            if key in data and data[key] != actual:
                raise SchemaError(f"'{key}' is {data[key]} but omega implies {actual}")
        return game

    def read_game(self, path: str) -> FiniteGame:
        game = self.game_from_dict(self.load_json(path))
        logger.info(f"Loaded {type(game).__name__} '{game.name}' with sizes {list(game.sizes)} from {path}")
        return game

    def write_game(self, g: FiniteGame, path: Optional[str] = None) -> str:
        return self.write_json(self.game_to_dict(g), path)

    # Profiles

    def profile_from_dict(self, data: Mapping[str, Any], index: int = 0) -> MixedProfile:
        """Profile document, verification report, or the index-th equilibrium of a search report"""
        data = self.unwrap(data)
        rows = data.get("profile")
        if rows is None and isinstance(data.get("found"), list):
            if not (0 <= index < len(data["found"])):
                raise SchemaError(f"Search report lists {len(data['found'])} equilibria, no index {index}")
            rows = data["found"][index].get("profile")
        if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
            raise SchemaError("Profile document needs a 'profile' list of probability lists")
        mode = ArithmeticMode(data["mode"]) if "mode" in data else None
        return MixedProfile.from_literals(rows, mode)

    def read_profile(self, path: str, index: int = 0) -> MixedProfile:
        return self.profile_from_dict(self.load_json(path), index)

    def write_profile(self, p: MixedProfile, path: Optional[str] = None, extra: Optional[Mapping[str, Any]] = None) -> str:
        document: Document = dict(extra or {})
        document.update(p.export_to_dict())
        return self.write_json(document, path)

    # Problem instances

    def parse_dimacs(self, text: str) -> CnfFormula:
        m: Optional[int] = None
        declared_clauses: Optional[int] = None
        clauses: List[List[int]] = []
        current: List[int] = []
        for number, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith('c'):
                continue
            if line.startswith('%'):
                break
            if line.startswith('p'):
                fields = line.split()
                if len(fields) != 4 or fields[1] != 'cnf':
                    raise SchemaError(f"Line {number}: malformed problem line '{line}'")
                m, declared_clauses = int(fields[2]), int(fields[3])
                continue
            try:
                literals = [int(token) for token in line.split()]
            except ValueError:
                raise SchemaError(f"Line {number}: non-integer literal in '{line}'")
            for literal in literals:
                if literal == 0:
                    clauses.append(current)
                    current = []
                else:
                    current.append(literal)
        if current:
            clauses.append(current)
        if m is None:
            raise SchemaError("DIMACS input has no 'p cnf' line")
        if declared_clauses is not None and declared_clauses != len(clauses):
            logger.warning(f"DIMACS header declares {declared_clauses} clauses, found {len(clauses)}")
        return CnfFormula(m, tuple(tuple(c) for c in clauses))

    def read_cnf(self, path: str) -> CnfFormula:
        with open(path, 'r', encoding='utf-8') as handle:
            return self.parse_dimacs(handle.read())

    def read_tdm(self, path: str) -> TdmInstance:
        with open(path, 'r', encoding='utf-8') as handle:
            first = handle.readline().strip()
        try:
            q = int(first)
        except ValueError:
            raise SchemaError(f"First line of '{path}' must be q, got '{first}'")
        try:
            frame = pd.read_csv(path, sep=r"\s+", header=None, skiprows=1, comment='#', dtype=int)
        except pd.errors.EmptyDataError:
            raise InvalidInstanceError(f"'{path}' lists no triples")
        except ValueError as e:
            raise SchemaError(f"Triples in '{path}' must be integers: {e}")
        if frame.shape[1] != 3:
            raise SchemaError(f"Every triple line needs 3 integers, '{path}' has {frame.shape[1]} columns")
        triples = tuple(tuple(int(x) for x in row) for row in frame.itertuples(index=False))
        return TdmInstance(q, triples)

    def mbp_from_dict(self, data: Mapping[str, Any]) -> MbpInstance:
        data = self.unwrap(data)
        if "A" not in data:
            raise SchemaError("Partition document needs an 'A' matrix")
        inst = MbpInstance(tuple(tuple(row) for row in data["A"]))
        for key, actual in (("n", inst.n), ("m", inst.m)):
            if key in data and data[key] != actual:
                raise SchemaError(f"'{key}' is {data[key]} but A has {actual}")
        return inst

    def read_mbp(self, path: str) -> MbpInstance:
        return self.mbp_from_dict(self.load_json(path))

    def read_document(self, path: str) -> Union[FiniteGame, MbpInstance]:
        """Game or partition instance, told apart by their fields"""
        data = self.unwrap(self.load_json(path))
        if "A" in data:
            return self.mbp_from_dict(data)
        return self.game_from_dict(data)


class InstanceIOFactory:
    """Factory for creating IO services"""

    @staticmethod
    def create_service(service_type: str = "json", **kwargs) -> IInstanceIOService:
        """Create IO service based on type"""
        if service_type.lower() == "json":
            return JsonInstanceIOService(**kwargs)
        else:
            raise ValueError(f"Unsupported instance IO service type: {service_type}")
