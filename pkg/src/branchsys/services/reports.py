"""Writing command reports: ``<command>.json`` plus a rendered ``<command>.txt``."""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from jinja2 import Environment, PackageLoader, StrictUndefined

from branchsys.core.logging_config import logger
from branchsys.models.grid import format_value
from branchsys.schemas.base import BaseSchema


@lru_cache()
def get_environment() -> Environment:
    env = Environment(
        loader=PackageLoader("branchsys", "templates"),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        autoescape=False,
    )
    env.filters["num"] = lambda v: "n/a" if v is None else f"{v:.6e}"
    env.filters["verdict"] = lambda ok: "pass" if ok else "fail"
    return env


def _flatten(prefix: str, value: Any, out: List[str]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], out)
    else:
        out.append(f"{prefix} = {json.dumps(value)}")


def config_lines(config: Dict[str, Any]) -> List[str]:
    """Resolved config as sorted ``dotted.key = value`` lines."""
    out: List[str] = []
    _flatten("", config, out)
    return out


def render_report(command: str, report: BaseSchema, config: Dict[str, Any], passed: bool) -> str:
    template = get_environment().get_template(f"{command}.txt.j2")
    return template.render(
        command=command,
        report=report,
        config_lines=config_lines(config),
        passed=passed,
    )


def write_report(
    output_dir: Union[str, Path],
    command: str,
    report: BaseSchema,
    config: Dict[str, Any],
    passed: bool,
) -> Path:
    """
    Write ``<command>.json`` and ``<command>.txt`` into ``output_dir``.

    Neither file carries a timestamp, so equal config and seed give equal bytes.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": command,
        "config": config,
        "passed": passed,
        "report": report.model_dump(mode="json"),
    }
    json_path = output_dir / f"{command}.json"
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    (output_dir / f"{command}.txt").write_text(
        render_report(command, report, config, passed), encoding="utf-8"
    )
    logger.info(f"Wrote {command} report to {output_dir}")
    return json_path


def write_matrix_csv(path: Union[str, Path], rows: Sequence[Iterable[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(",".join(format_value(v) for v in row) + "\n" for row in rows), encoding="utf-8")
    return path
