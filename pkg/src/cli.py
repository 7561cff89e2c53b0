"""
命令行入口 - 读取实验清单（或内联参数），运行一个实验并写出报告

    python -m src.cli --manifest manifests/theorem11_d2.json
    python -m src.cli --experiment divergence --map normalize --oracle l1 --out results/div

退出码：0 无失败；1 存在 fail；2 清单、目录或配置错误，或参数组合使实验无法进行。
"""
import logging
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .config.settings import LabConfig
from .experiments import create_experiment, load_manifest
from .experiments.manifest import ExperimentManifest
from .models.errors import CatalogError, ManifestError, SphereLabError
from .modules.report_generator import ReportGenerator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_MANIFEST = 2

app = typer.Typer(help="球面映射数值实验室", add_completion=False)
console = Console()


def _setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=verbose)],
        force=True,
    )


def _load_config(config_path: Optional[Path]) -> LabConfig:
    config = LabConfig.from_yaml(str(config_path)) if config_path else LabConfig()
    config = config.with_env_overrides()
    config.validate()
    return config


@app.command()
def run(
    manifest: Optional[Path] = typer.Option(None, "--manifest", help="JSON 实验清单；给出时忽略内联参数"),
    experiment: Optional[str] = typer.Option(None, "--experiment", help="实验标识"),
    oracle: str = typer.Option("l1", "--oracle", help="范数: l1 / l2 / lr:<r> / linf"),
    map_name: str = typer.Option("normalize", "--map", help="映射标识，可带 abs+ / sym(...)+ 前缀"),
    d: int = typer.Option(1, "--d", help="交错元组长度"),
    eps: float = typer.Option(0.5, "--eps", help="ε"),
    k_budget: Optional[int] = typer.Option(None, "--k-budget", help="维数 k（默认由增长集决定）"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子（采样类实验必填）"),
    out: str = typer.Option("results/run", "--out", help="输出路径前缀"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML 容差配置"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="DEBUG 日志"),
):
    """运行一个实验，写出 <out>.report.json、<out>.summary.csv、<out>.meta.json"""
    _setup_logging(verbose)

    try:
        if manifest is not None:
            plan = load_manifest(manifest)
        elif experiment is None:
            raise ManifestError("必须给出 --manifest 或 --experiment")
        else:
            plan = ExperimentManifest(
                experiment=experiment, oracle=oracle, map=map_name, d=d, eps=eps,
                k_budget=k_budget, seed=seed, output=out,
            )
        config = _load_config(config_path)
    except (ManifestError, CatalogError, ValidationError, ValueError, AssertionError, OSError) as e:
        console.print(f"[bold red]✗ 清单无效:[/bold red] {e}")
        raise typer.Exit(code=EXIT_BAD_MANIFEST)

    try:
        result = create_experiment(plan, config, console=console).run(verbose=True)
    except (ManifestError, CatalogError) as e:
        console.print(f"[bold red]✗ 清单无效:[/bold red] {e}")
        raise typer.Exit(code=EXIT_BAD_MANIFEST)
    except SphereLabError as e:
        # 参数组合在求值时才暴露的错误
        logger.debug("实验中止", exc_info=True)
        console.print(f"[bold red]✗ 清单参数不可用 ({type(e).__name__}):[/bold red] {e}")
        raise typer.Exit(code=EXIT_BAD_MANIFEST)

    generator = ReportGenerator(result)
    paths = generator.write(plan.output)
    logger.info(generator.format_summary())
    for kind, path in paths.items():
        console.print(f"  {kind}: {path}")

    if not result.passed:
        console.print(f"[bold red]✗ {result.failures} 项检查失败[/bold red]")
        raise typer.Exit(code=EXIT_FAILED)
    raise typer.Exit(code=EXIT_OK)


if __name__ == "__main__":
    app()
