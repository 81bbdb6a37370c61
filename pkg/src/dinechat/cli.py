"""Command-line surface: training, rollouts, DINE export, ad-hoc questions,
experiment runs, and serving the HTTP API.

All commands accept ``--config`` pointing at the shared key=value file; flags
override it. Exit codes: 0 on success, 2 on usage errors, 1 on any other
failure (with a diagnostic on stderr).
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import assets
from .agent import DecomposedDQNAgent, random_policy_returns, write_training_log
from .config import load_config
from .dines import encode_dines, rollout_and_record, slice_trace
from .errors import DinechatError
from .experiment import (ExperimentConfig, render_report, report_to_dict,
                         run_experiment)
from .explain import answer_question
from .gateway import CompletionParams, make_gateway
from .questions import QuestionSpec
from .simenv import WebshopEnv
from .tracestore import TraceStore


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dinechat",
        description="Explainable deep RL for adaptive services")
    parser.add_argument("--config", help="shared key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the decomposed agent")
    p_train.add_argument("--episodes", type=int, default=200)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out", required=True, help="checkpoint path")
    p_train.add_argument("--log", help="JSONL training log path")

    p_roll = sub.add_parser("rollout", help="greedy rollout with DINE records")
    p_roll.add_argument("--checkpoint", required=True)
    p_roll.add_argument("--steps", type=int, default=21)
    p_roll.add_argument("--seed", type=int, default=0)
    p_roll.add_argument("--out-trace", required=True,
                        help="trace id to store under the data directory")
    p_roll.add_argument("--data-dir", default="data")

    p_dines = sub.add_parser("dines", help="DINE operations")
    dines_sub = p_dines.add_subparsers(dest="dines_command", required=True)
    p_export = dines_sub.add_parser("export", help="export DINE JSON")
    p_export.add_argument("--trace", required=True)
    p_export.add_argument("--from", dest="from_", type=int, default=None)
    p_export.add_argument("--to", type=int, default=None)
    p_export.add_argument("--data-dir", default="data")
    p_export.add_argument("--out", help="output file (default stdout)")

    p_ask = sub.add_parser("ask", help="answer a question about a trace")
    p_ask.add_argument("--trace", required=True)
    p_ask.add_argument("--question", required=True)
    p_ask.add_argument("--closed", action="store_true")
    p_ask.add_argument("--options", nargs="*", default=[])
    p_ask.add_argument("--strategy", choices=["engineered", "zero_shot"],
                       default="engineered")
    p_ask.add_argument("--backend", choices=["live", "mock", "oracle"],
                       default="oracle")
    p_ask.add_argument("--temperature", type=float, default=0.0)
    p_ask.add_argument("--top-p", type=float, default=1.0)
    p_ask.add_argument("--max-token", type=int, default=350)
    p_ask.add_argument("--n", type=int, default=1)
    p_ask.add_argument("--data-dir", default="data")
    p_ask.add_argument("--show-prompts", action="store_true")

    p_eval = sub.add_parser("eval", help="evaluation harness")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)
    p_run = eval_sub.add_parser("run", help="run the experiment grid")
    p_run.add_argument("--backend", choices=["live", "mock", "oracle"],
                       default="oracle")
    p_run.add_argument("--trace", default=assets.REFERENCE_TRACE_ID)
    p_run.add_argument("--repetitions", type=int, default=54)
    p_run.add_argument("--max-token", type=int, default=350)
    p_run.add_argument("--exp-dir", help="directory for resumable cell state")
    p_run.add_argument("--data-dir", default="data")
    p_run.add_argument("--format", choices=["table", "json"], default="table")
    p_run.add_argument("--out", help="report output file (default stdout)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data-dir", default="data")
    p_serve.add_argument("--backend", choices=["live", "mock", "oracle"],
                         default=None)

    return parser


def _trace_store(data_dir):
    store = TraceStore(Path(data_dir) / "traces")
    if not store.exists(assets.REFERENCE_TRACE_ID):
        store.store(assets.load_reference_trace())
    return store


def cmd_train(args, config):
    agent_config = replace(config.agent, seed=args.seed)
    env = WebshopEnv(config.env)
    agent = DecomposedDQNAgent(agent_config)
    log = agent.train(env, episodes=args.episodes)
    agent.save(args.out)
    if args.log:
        write_training_log(log, args.log)
    baseline = random_policy_returns(env, episodes=20, seed=args.seed)
    if log:
        tail = [e["return_total"] for e in log[-20:]]
        print(f"trained {args.episodes} episodes; last-{len(tail)} mean return "
              f"{sum(tail) / len(tail):.1f} (random baseline {baseline:.1f})")
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_rollout(args, config):
    agent = DecomposedDQNAgent.load(args.checkpoint)
    env = WebshopEnv(config.env)
    trace = rollout_and_record(
        agent, env, steps=args.steps, seed=args.seed,
        trace_id=args.out_trace,
        description=assets.load_default_description().text,
        checkpoint_ref=str(args.checkpoint))
    store = _trace_store(args.data_dir)
    store.store(trace)
    uncertain = sum(1 for r in trace.records if r.uncertain)
    print(f"stored trace '{args.out_trace}' with {len(trace)} records "
          f"({uncertain} uncertain)")
    return 0


def cmd_dines_export(args, config):
    store = _trace_store(args.data_dir)
    trace = store.load(args.trace)
    lo, hi = trace.timestep_range()
    lo = args.from_ if args.from_ is not None else lo
    hi = args.to if args.to is not None else hi
    records = slice_trace(trace, range(lo, hi + 1))
    encoded = encode_dines(records)
    if args.out:
        Path(args.out).write_text(encoded + "\n")
        print(f"wrote {len(records)} records to {args.out}")
    else:
        print(encoded)
    return 0


def cmd_ask(args, config):
    store = _trace_store(args.data_dir)
    trace = store.load(args.trace)
    gateway = make_gateway(args.backend, config=config.gateway,
                           mock_script=config.service.mock_script or None)
    params = CompletionParams(n=args.n, max_token=args.max_token,
                              temperature=args.temperature, top_p=args.top_p,
                              model=config.gateway.model)
    question = QuestionSpec(
        text=args.question,
        form="closed" if args.closed else "open",
        options=tuple(args.options))
    outcome = answer_question(question, trace, gateway,
                              assets.load_default_description(),
                              params=params, strategy=args.strategy)
    print(f"[type {outcome.question_type}; timesteps "
          f"{outcome.timesteps[0]}..{outcome.timesteps[-1]}"
          f"{' (defaulted)' if outcome.defaulted else ''}]")
    if args.show_prompts:
        for seq in outcome.prompts:
            print(f"--- stage {seq.stage} ---")
            for message in seq.messages:
                print(f"[{message.role}] {message.text}")
    for answer in outcome.answers:
        print(answer)
    return 0


def cmd_eval_run(args, config):
    store = _trace_store(args.data_dir)
    trace = store.load(args.trace)
    gateway = make_gateway(args.backend, config=config.gateway,
                           mock_script=config.service.mock_script or None)
    exp_config = ExperimentConfig(repetitions=args.repetitions,
                                  max_token=args.max_token)
    report = run_experiment(exp_config, trace, assets.load_default_bank(),
                            gateway, assets.load_default_description(),
                            exp_dir=args.exp_dir)
    if args.format == "json":
        rendered = json.dumps(report_to_dict(report), indent=2)
    else:
        rendered = render_report(report, fmt="table")
    if args.out:
        Path(args.out).write_text(rendered)
        print(f"report written to {args.out}")
    else:
        print(rendered)
    return 0 if report.is_complete() else 1


def cmd_serve(args, config):
    import uvicorn

    from .service import create_app

    service = replace(config.service,
                      data_dir=args.data_dir,
                      backend=args.backend or config.service.backend)
    app = create_app(replace(config, service=service))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "train":
            return cmd_train(args, config)
        if args.command == "rollout":
            return cmd_rollout(args, config)
        if args.command == "dines":
            return cmd_dines_export(args, config)
        if args.command == "ask":
            return cmd_ask(args, config)
        if args.command == "eval":
            return cmd_eval_run(args, config)
        if args.command == "serve":
            return cmd_serve(args, config)
        parser.error(f"unknown command {args.command!r}")
    except DinechatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
