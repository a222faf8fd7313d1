"""Built-in discrete groups and parsing of user-supplied ones."""
from __future__ import annotations

from typing import Any, Callable

from .errors import ConfigError
from .exact import ExactElement
from .flow_lab import DiscreteGroupSpec, diagonal_product


def _el(*blocks) -> ExactElement:
    return ExactElement.from_entries(*blocks)


T = [[1, 1], [0, 1]]
S = [[0, -1], [1, 0]]
T2 = [[1, 2], [0, 1]]
L2 = [[1, 0], [2, 1]]


def cyclic_parabolic(word_radius: int = 20) -> DiscreteGroupSpec:
    return DiscreteGroupSpec("cyclic_parabolic", "sl2r", (_el(T),), word_radius,
                             torsion_free=True, is_lattice=False, notes="<T>")


def sl2z(word_radius: int = 8) -> DiscreteGroupSpec:
    return DiscreteGroupSpec("sl2z", "sl2r", (_el(S), _el(T)), word_radius,
                             torsion_free=False, is_lattice=True, notes="S has order 4")


def schottky(word_radius: int = 6) -> DiscreteGroupSpec:
    a = _el([[5, 12], [2, 5]])
    b = _el([[5, 2], [12, 5]])
    return DiscreteGroupSpec("schottky", "sl2r", (a, b), word_radius,
                             torsion_free=True, is_lattice=False,
                             notes="disjoint isometric circles, free and purely hyperbolic")


def sanov(word_radius: int = 8) -> DiscreteGroupSpec:
    return DiscreteGroupSpec("sanov", "sl2r", (_el(T2), _el(L2)), word_radius,
                             torsion_free=True, is_lattice=True, notes="free, index 12 in SL(2,Z)")


def gaussian_parabolic(word_radius: int = 6) -> DiscreteGroupSpec:
    return DiscreteGroupSpec("gaussian_parabolic", "sl2c_real",
                             (_el(T), _el([[1, "i"], [0, 1]])), word_radius,
                             torsion_free=True, is_lattice=False, notes="translations by Z[i]")


def sanov_diagonal(word_radius: int = 8) -> DiscreteGroupSpec:
    return diagonal_product(sanov(word_radius), 2, name="sanov_diagonal")


BUILTINS: dict[str, Callable[..., DiscreteGroupSpec]] = {
    "cyclic_parabolic": cyclic_parabolic,
    "sl2z": sl2z,
    "schottky": schottky,
    "sanov": sanov,
    "gaussian_parabolic": gaussian_parabolic,
    "sanov_diagonal": sanov_diagonal,
}


def builtin(name: str, word_radius: int | None = None) -> DiscreteGroupSpec:
    try:
        make = BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown group {name!r}; known: {', '.join(sorted(BUILTINS))}") from None
    return make() if word_radius is None else make(word_radius)


def group_from_config(cfg: Any) -> DiscreteGroupSpec:
    """A built-in name, or a mapping with ``algebra`` and ``generators``.

    Generators are lists of 2x2 blocks with integer, ``"p/q"`` or Gaussian
    (``"1+2i"``) entries; one block per factor.
    """
    if isinstance(cfg, str):
        return builtin(cfg)
    if not isinstance(cfg, dict):
        raise ConfigError("group must be a name or a mapping")
    if "builtin" in cfg:
        return builtin(cfg["builtin"], cfg.get("word_radius"))
    try:
        alg = cfg["algebra"]
        raw = cfg["generators"]
    except KeyError as e:
        raise ConfigError(f"group.{e.args[0]} is required") from None
    gens = []
    for i, g in enumerate(raw):
        blocks = g if isinstance(g[0][0], list) else [g]
        try:
            gens.append(ExactElement.from_entries(*blocks))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"group.generators[{i}]: {e}") from None
    return DiscreteGroupSpec(cfg.get("name", "custom"), alg, tuple(gens), int(cfg.get("word_radius", 8)),
                             cfg.get("torsion_free"), cfg.get("is_lattice"), cfg.get("notes", ""))
