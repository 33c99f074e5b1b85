"""Workspaces: a ``smartkb.toml`` file plus the module, shape and template files it names.

Example::

    [workspace]
    modules = ["modules/*.sksm"]
    shapes = ["shapes/*.skshape"]
    templates = ["templates/*.skt"]
    format = "text"        # or "json"
    strict = false         # treat lint findings as errors in `load`

Paths are globs relative to the config file. The workspace root comes from
an explicit argument, else ``$SMARTKB_WORKSPACE``, else the current
directory.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import SmartKBError
from .kb import KnowledgeBase, resolve_module_set
from .model import Module
from .native import read_module_file

CONFIG_NAME = "smartkb.toml"
ENV_VAR = "SMARTKB_WORKSPACE"
FORMATS = ("text", "json")


class WorkspaceError(SmartKBError):
    """Missing or malformed workspace configuration, or an unreadable file."""


@dataclass(frozen=True)
class WorkspaceConfig:
    root: Path
    modules: tuple[str, ...] = ("modules/*.sksm",)
    shapes: tuple[str, ...] = ()
    templates: tuple[str, ...] = ()
    format: str = "text"
    strict: bool = False

    @classmethod
    def load(cls, path: Path) -> WorkspaceConfig:
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise WorkspaceError(f"cannot read {path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise WorkspaceError(f"{path}: {exc}") from None
        section = data.get("workspace", {})
        if not isinstance(section, dict):
            raise WorkspaceError(f"{path}: [workspace] must be a table")
        unknown = sorted(set(section) - {"modules", "shapes", "templates", "format", "strict"})
        if unknown:
            raise WorkspaceError(f"{path}: unknown keys {', '.join(unknown)}")
        kw: dict = {}
        for key in ("modules", "shapes", "templates"):
            if key in section:
                value = section[key]
                if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                    raise WorkspaceError(f"{path}: {key} must be a list of path globs")
                kw[key] = tuple(value)
        if "format" in section:
            if section["format"] not in FORMATS:
                raise WorkspaceError(f"{path}: format must be one of {', '.join(FORMATS)}")
            kw["format"] = section["format"]
        if "strict" in section:
            if not isinstance(section["strict"], bool):
                raise WorkspaceError(f"{path}: strict must be true or false")
            kw["strict"] = section["strict"]
        return cls(path.parent, **kw)


def _expand(root: Path, patterns: tuple[str, ...], what: str) -> list[Path]:
    out: list[Path] = []
    for pattern in patterns:
        if any(ch in pattern for ch in "*?["):
            found = sorted(root.glob(pattern))
        else:
            found = [root / pattern]
            if not found[0].is_file():
                raise WorkspaceError(f"{what} file not found: {found[0]}")
        out += [p for p in found if p not in out]
    return out


@dataclass
class Workspace:
    config: WorkspaceConfig
    module_files: list[Path] = field(default_factory=list)
    shape_files: list[Path] = field(default_factory=list)
    template_files: list[Path] = field(default_factory=list)
    _kb: KnowledgeBase | None = None

    @classmethod
    def open(cls, root: str | Path | None = None) -> Workspace:
        if root is None:
            root = os.environ.get(ENV_VAR) or "."
        root = Path(root)
        cfg_path = root if root.is_file() else root / CONFIG_NAME
        if cfg_path.is_file():
            config = WorkspaceConfig.load(cfg_path)
        elif root.is_dir():
            config = WorkspaceConfig(root)
        else:
            raise WorkspaceError(f"no workspace at {root}")
        return cls(config,
                   _expand(config.root, config.modules, "module"),
                   _expand(config.root, config.shapes, "shape"),
                   _expand(config.root, config.templates, "template"))

    def modules(self) -> list[Module]:
        """Parse every module file; raises ``ParseError`` (with the file name) on bad input."""
        return [read_module_file(p) for p in self.module_files]

    @property
    def kb(self) -> KnowledgeBase:
        if self._kb is None:
            if not self.module_files:
                raise WorkspaceError(f"no module files under {self.config.root}")
            self._kb = resolve_module_set(self.modules())
        return self._kb

    def shapes(self) -> list:
        from .shapes import read_shapes_file
        out = []
        for p in self.shape_files:
            out += read_shapes_file(p)
        return out

    def templates(self) -> list:
        from .templates import read_template_file
        out = []
        for p in self.template_files:
            out += read_template_file(p)
        return out
