#!/usr/bin/env python3
"""
RiskEq - Risk-averse equilibria of finite games, with the hardness gadgets behind them

Commands:
- gadget: build the Crawford, SAT, partition and scheduling games
- lift: turn a satisfying assignment or a partition solution into a mixed profile
- solve: search equilibria (pure, support2p, grid, dynamics)
- verify: check one profile against a valuation
- check: run a property suite and report pass/fail with a counterexample
"""

import sys
import argparse
from typing import List, Optional

from src.application.container.dependency_injection import (
    ContainerFactory,
    ServiceConfig,
    available_parallelism
)
from src.application.orchestrator.riskeq_orchestrator import (
    CHECKS,
    GADGETS,
    LIFTS,
    SOLVE_METHODS,
    RiskEqOrchestrator,
    RunConfig
)
from src.application.services.report_rendering_service import OutputFormat
from src.domain.value_objects.scalar import DEFAULT_TOLERANCE


VERSION = "1.0.0"


def create_service_config(args) -> ServiceConfig:
    """Create service configuration from command line arguments"""
    config = ServiceConfig(
        arithmetic_mode=args.mode,
        tolerance=args.tol if args.tol is not None else DEFAULT_TOLERANCE,
        workers=args.workers if args.workers is not None else available_parallelism(),
        seed=args.seed,
        enable_error_logging=not args.disable_logging,
        output_format=OutputFormat(args.format)
    )
    if args.samples is not None:
        config.samples = args.samples
    if args.grid_tol is not None:
        config.grid_tolerance = args.grid_tol
    if args.support_pair_cap is not None:
        config.support_pair_cap = args.support_pair_cap
    if args.log_file:
        config.log_file = args.log_file
    return config


def create_run_config(args, service_config: ServiceConfig) -> RunConfig:
    """Create run configuration from command line arguments"""
    return RunConfig(
        command=args.command,
        subcommand=getattr(args, "name", None),
        valuation=getattr(args, "valuation", None),
        game_path=getattr(args, "game", None),
        profile_path=getattr(args, "profile", None),
        profile_index=getattr(args, "profile_index", 0),
        input_path=getattr(args, "input", None),
        cnf_path=getattr(args, "cnf", None),
        output_path=args.output,
        csv_path=args.csv,
        method=getattr(args, "method", None),
        resolution=getattr(args, "resolution", 0.01),
        tol=args.tol,
        delta=getattr(args, "delta", None),
        step=getattr(args, "step", "1/100"),
        assignment=getattr(args, "assign", None),
        rows=getattr(args, "rows", None),
        player=getattr(args, "player", 1),
        start=getattr(args, "start", None),
        max_steps=getattr(args, "max_steps", 1000),
        max_support_size=getattr(args, "max_support_size", None),
        instances=getattr(args, "instances", 200),
        service_config=service_config
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="Arquivo de saída do relatório JSON (padrão: stdout)")
    common.add_argument("--csv", help="Grava a visão tabular do resultado em CSV")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default="json",
                        help="Formato do relatório em stdout (padrão: json)")
    common.add_argument("--mode", choices=["exact", "float"], help="Força o modo aritmético das entradas")
    common.add_argument("--tol", type=float, help=f"Tolerância de comparação (padrão: {DEFAULT_TOLERANCE})")
    common.add_argument("--grid-tol", type=float, help="Tolerância de aceitação da busca em grade (padrão: 1e-3)")
    common.add_argument("--support-pair-cap", type=int, help="Máximo de pares de suporte enumerados")
    common.add_argument("--workers", type=int, help="Processos paralelos (padrão: RISKEQ_WORKERS ou núcleos disponíveis)")
    common.add_argument("--seed", type=int, default=0, help="Semente das amostragens (padrão: 0)")
    common.add_argument("--samples", type=int, help="Amostras das verificações aleatórias (padrão: 500)")
    common.add_argument("--log-file", help="Arquivo de log rotativo (padrão: riskeq_errors.log)")
    common.add_argument("--disable-logging", action="store_true", help="Desabilitar logging")

    parser = argparse.ArgumentParser(
        description="RiskEq - Equilíbrios avessos ao risco em jogos finitos",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemplos de uso:
  python riskeq.py gadget crawford --delta 1/4 -o g.json
  python riskeq.py solve --method support2p --valuation e+var:gamma=1 g.json
  python riskeq.py gadget sat --cnf phi.cnf -o sat.json
  python riskeq.py lift sat-assignment --cnf phi.cnf --assign 11 -o p.json
  python riskeq.py verify --game sat.json --profile p.json --valuation e+var:gamma=1
  python riskeq.py check risk-positivity --valuation nu:r=3

Códigos de saída: 0 = sucesso, 1 = propriedade violada ou nenhum equilíbrio, 2 = erro de uso
        """
    )
    parser.add_argument("--health-check", action="store_true", help="Executar verificação de saúde e sair")
    parser.add_argument("--version", action="version", version=f"riskeq {VERSION}")
    commands = parser.add_subparsers(dest="command")

    gadget = commands.add_parser("gadget", parents=[common], help="Constrói jogos e instâncias das reduções")
    gadget.add_argument("name", choices=GADGETS)
    gadget.add_argument("input", nargs="?", help="Arquivo 3DM (mbp-from-3dm) ou JSON de partição (sched-from-mbp)")
    gadget.add_argument("--cnf", help="Fórmula DIMACS (sat)")
    gadget.add_argument("--delta", help="Parâmetro delta como p/q")
    gadget.add_argument("--valuation", help="Valoração usada para escolher delta (sat)")

    lift = commands.add_parser("lift", parents=[common], help="Levanta soluções para perfis mistos")
    lift.add_argument("name", choices=LIFTS)
    lift.add_argument("input", nargs="?", help="JSON de partição (mbp-solution)")
    lift.add_argument("--cnf", help="Fórmula DIMACS (sat-assignment)")
    lift.add_argument("--assign", help="Atribuição como '11', 'TF' ou '1,0'")
    lift.add_argument("--rows", help="Linhas da solução, base 1, ex.: '1,2'")
    lift.add_argument("--valuation", help="Valoração (mbp-solution)")

    solve = commands.add_parser("solve", parents=[common], help="Busca equilíbrios")
    solve.add_argument("input", nargs="?", help="Jogo JSON")
    solve.add_argument("--game", help="Jogo JSON (alternativa ao posicional)")
    solve.add_argument("--method", choices=SOLVE_METHODS, default="pure")
    solve.add_argument("--valuation", required=True, help="Valoração, ex.: e+var:gamma=1 ou arquivo JSON")
    solve.add_argument("--resolution", type=float, default=0.01, help="Resolução da grade (padrão: 0.01)")
    solve.add_argument("--start", help="Perfil puro inicial da dinâmica, índices base 0, ex.: '0,0'")
    solve.add_argument("--max-steps", type=int, default=1000)
    solve.add_argument("--max-support-size", type=int, help="Maior suporte enumerado por jogador (support2p)")

    verify = commands.add_parser("verify", parents=[common], help="Verifica um perfil")
    verify.add_argument("--game", required=True, help="Jogo JSON")
    verify.add_argument("--profile", required=True, help="Perfil JSON, relatório de verificação ou de busca")
    verify.add_argument("--profile-index", type=int, default=0, help="Equilíbrio usado de um relatório de busca")
    verify.add_argument("--valuation", required=True)

    check = commands.add_parser("check", parents=[common], help="Executa uma verificação de propriedade")
    check.add_argument("name", choices=CHECKS)
    check.add_argument("input", nargs="?", help="Fórmula DIMACS (sat-reduction)")
    check.add_argument("--valuation")
    check.add_argument("--delta", help="Parâmetro delta como p/q")
    check.add_argument("--step", default="1/100", help="Passo das grades exatas (padrão: 1/100)")
    check.add_argument("--resolution", type=float, default=0.01, help="Resolução da grade (padrão: 0.01)")
    check.add_argument("--game", help="Jogo JSON")
    check.add_argument("--profile", help="Perfil JSON")
    check.add_argument("--profile-index", type=int, default=0)
    check.add_argument("--cnf", help="Fórmula DIMACS (sat-reduction)")
    check.add_argument("--player", type=int, default=1, help="Jogador, base 1")
    check.add_argument("--instances", type=int, default=200, help="Jogos aleatórios (moment-formula)")
    return parser


def run_health_check() -> int:
    print("🔍 Executando verificação de saúde do sistema...")
    container = ContainerFactory.create_test_container()
    container.initialize()
    health_status = container.health_check()

    print(f"\n📊 Status do Sistema: {health_status['status'].upper()}")
    print("=" * 50)

    for service_name, service_health in health_status['services'].items():
        status_icon = "✅" if service_health.get('healthy', False) else "❌"
        print(f"{status_icon} {service_name.title()}: {'OK' if service_health.get('healthy', False) else 'ERRO'}")

    if health_status['status'] != 'healthy':
        print(f"\n⚠️ Sistema não está completamente saudável")
        return 1
    print(f"\n🎉 Sistema funcionando perfeitamente!")
    return 0


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, execute one command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.health_check:
        return run_health_check()
    if not args.command:
        parser.print_help(sys.stderr)
        return 2

    try:
        service_config = create_service_config(args)
    except ValueError as e:
        print(f"❌ Erro: {e}", file=sys.stderr)
        return 2
    run_config = create_run_config(args, service_config)
    container = ContainerFactory.create_container_with_config(service_config)
    orchestrator = RiskEqOrchestrator(container)
    return orchestrator.run(run_config)


def main():
    """Main entry point"""
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\n\n👋 Até logo!")
        sys.exit(130)


if __name__ == "__main__":
    main()
