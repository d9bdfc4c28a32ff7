"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import timedelta

import numpy as np

from . import categorizer as cat
from . import clustering, entities, evalmetrics, gatnet, pipeline, synth, trg, userscore
from .config import PipelineConfig
from .corpus import (
    Corpus,
    format_timestamp,
    load_corpus,
    load_features,
    parse_duration,
    parse_timestamp,
    save_corpus,
    save_features,
    split_corpus_by_events,
    window_stream,
)
from .errors import DataValidationError, NumericalError, UsageError


def _load(args, split_tag: str = "unlabeled") -> Corpus:
    features = getattr(args, "features", None)
    return load_corpus(args.input, feature_source=features, split_tag=split_tag)


def _load_events(path) -> list[clustering.EventInstance]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            events.append(
                clustering.EventInstance(
                    cluster_id=lineno - 1,
                    tweet_ids=tuple(rec["tweet_ids"]),
                    n_users=int(rec["n_users"]),
                    n_tweets=len(rec["tweet_ids"]),
                    score=float(rec["score"]),
                    window_start=parse_timestamp(rec["window_start"]) if rec.get("window_start") else None,
                    categories=tuple(rec.get("categories", ())),
                )
            )
    return events


def _save_checkpoint_meta(path, scaler, config: PipelineConfig) -> None:
    meta = {
        "blocks": config.blocks,
        "hash_dim": config.hash_dim,
        "standardize_temporal": config.standardize_temporal,
        "scaler_mean": list(scaler.mean) if scaler else None,
        "scaler_scale": list(scaler.scale) if scaler else None,
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")


def _load_checkpoint_meta(path):
    try:
        with open(str(path) + ".meta.json", "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        return None, None
    scaler = None
    if meta.get("scaler_mean") is not None:
        scaler = trg.TemporalScaler(
            mean=np.asarray(meta["scaler_mean"], dtype=np.float64),
            scale=np.asarray(meta["scaler_scale"], dtype=np.float64),
        )
    return meta, scaler


def _blocks_from_config(config: PipelineConfig) -> trg.FeatureBlocks:
    use_text, use_temporal, use_category = config.block_flags()
    return trg.FeatureBlocks(
        text=use_text,
        temporal=use_temporal,
        category=use_category,
        standardize_temporal=config.standardize_temporal,
        hash_dim=config.hash_dim,
    )


def _config_from_args(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    for key in (
        "lr",
        "margin",
        "patience",
        "seed",
        "embed_dim",
        "eps",
        "min_pts",
        "filter_threshold",
    ):
        value = getattr(args, key, None)
        if value is not None:
            if key == "lr":
                config.learning_rate = value
            elif key == "eps":
                config.eps = str(value)
            else:
                setattr(config, key, value)
    return config


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = _load(args)
    n_entities = sum(len(t.entities) for t in corpus.tweets)
    summary = {
        "tweets": len(corpus.tweets),
        "users": len({t.user_id for t in corpus.tweets}),
        "labeled": sum(t.gold_event_id is not None for t in corpus.tweets),
        "events": len({t.gold_event_id for t in corpus.tweets if t.gold_event_id}),
        "entities": n_entities,
        "features": list(corpus.features.shape) if corpus.features is not None else None,
    }
    print(json.dumps(summary))
    if args.out:
        save_corpus(corpus, args.out)
    return 0


def cmd_window(args) -> int:
    corpus = _load(args)
    windows = window_stream(corpus, parse_duration(args.length), parse_duration(args.stride))
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for w in windows:
            rec = {
                "start": format_timestamp(w.start),
                "end": format_timestamp(w.end),
                "count": len(w.member_indices),
                "tweet_ids": [corpus.tweets[i].tweet_id for i in w.member_indices],
            }
            out.write(json.dumps(rec) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_extract_entities(args) -> int:
    corpus = _load(args)
    gaz = entities.Gazetteer.from_tsv(
        args.gazetteer,
        entity_types=entities.load_entity_types(args.types_manifest)
        if args.types_manifest
        else entities.DEFAULT_ENTITY_TYPES,
    )
    import dataclasses

    tweets = []
    n_mentions = 0
    for tweet in corpus.tweets:
        mentions = entities.extract_gazetteer(tweet.text, gaz)
        n_mentions += len(mentions)
        tweets.append(dataclasses.replace(tweet, entities=tuple(mentions)))
    save_corpus(Corpus(tweets=tuple(tweets), split_tag=corpus.split_tag), args.out)
    print(json.dumps({"tweets": len(tweets), "mentions": n_mentions}))
    return 0


def _read_annotation_file(path):
    ids, mention_sets = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            ids.append(rec["tweet_id"])
            mention_sets.append(entities.mentions_from_json(rec.get("entities", [])))
    return ids, mention_sets


def cmd_ner_eval(args) -> int:
    gold_ids, gold = _read_annotation_file(args.gold)
    pred_ids, pred = _read_annotation_file(args.pred)
    if gold_ids != pred_ids:
        raise DataValidationError("gold and predicted files list different tweet_id sequences")
    p, r, f1 = entities.ner_evaluate(gold, pred)
    print(json.dumps({"precision": p, "recall": r, "f1": f1}))
    return 0


def cmd_train_categorizer(args) -> int:
    corpus = _load(args)
    gold_sets = [t.gold_categories for t in corpus.tweets if t.gold_categories is not None]
    labeled_idx = [i for i, t in enumerate(corpus.tweets) if t.gold_categories is not None]
    if not labeled_idx:
        raise DataValidationError("no tweets carry gold_categories")
    sub = corpus.subset(labeled_idx)
    features = trg.text_matrix(sub, args.hash_dim)
    gold = cat.labels_to_matrix(gold_sets)
    cfg = cat.CategorizerConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        patience=args.patience,
        max_epochs=args.max_epochs,
        pos_weight=args.pos_weight,
        seed=args.seed,
    )
    model, log = cat.train_categorizer(features, gold, cfg)
    model.save(args.out)
    print(json.dumps({"epochs": sum(1 for e in log if "epoch" in e), "model": args.out}))
    return 0


def cmd_tag_categories(args) -> int:
    corpus = _load(args)
    model = cat.CategorizerModel.load(args.model)
    features = trg.text_matrix(corpus, args.hash_dim)
    binary, probs = cat.predict_categories(model, features)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for i, tweet in enumerate(corpus.tweets):
            rec = {
                "tweet_id": tweet.tweet_id,
                "categories": [model.labels[j] for j in range(len(model.labels)) if binary[i, j]],
                "probs": {model.labels[j]: probs[i, j] for j in range(len(model.labels))},
            }
            out.write(json.dumps(rec) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_build_graph(args) -> int:
    corpus = _load(args)
    graph = trg.build_graph(
        corpus,
        self_loops=args.self_loops == "on",
        max_posting=args.max_posting or None,
    )
    if args.out:
        trg.dump_graph(graph, args.out)
    info = {"nodes": graph.n, "edges": graph.n_edges, "self_loops": graph.self_loops}
    if args.blocks:
        config = PipelineConfig(blocks=args.blocks, hash_dim=args.hash_dim)
        feats = trg.assemble_features(corpus, graph, _blocks_from_config(config))
        info["feature_dim"] = feats.dim
        info["blocks"] = {name: list(span) for name, span in feats.layout.items()}
    print(json.dumps(info))
    return 0


def cmd_train(args) -> int:
    config = _config_from_args(args)
    train_corpus = load_corpus(args.train, feature_source=args.train_features, split_tag="train")
    val_corpus = load_corpus(args.val, feature_source=args.val_features, split_tag="validation")
    blocks = _blocks_from_config(config)

    train_graph = trg.build_graph(train_corpus, self_loops=config.self_loops, max_posting=config.max_posting or None)
    train_feats = trg.assemble_features(train_corpus, train_graph, blocks)
    val_graph = trg.build_graph(val_corpus, self_loops=config.self_loops, max_posting=config.max_posting or None)
    val_feats = trg.assemble_features(val_corpus, val_graph, blocks, scaler=train_feats.scaler)

    cfg = gatnet.TrainConfig(
        learning_rate=config.learning_rate,
        margin=config.margin,
        patience=config.patience,
        max_epochs=config.max_epochs,
        seed=config.seed,
        triplet_weight=config.triplet_weight,
        pairwise_weight=config.pairwise_weight,
    )
    params, log = gatnet.train(
        train_graph,
        train_feats,
        [t.gold_event_id for t in train_corpus.tweets],
        cfg,
        val_graph=val_graph,
        val_features=val_feats,
        val_labels=[t.gold_event_id for t in val_corpus.tweets],
        embed_dim=config.embed_dim,
        n_layers=config.n_layers,
        heads=config.heads,
        leaky_slope=config.leaky_slope,
    )
    gatnet.save_checkpoint(params, args.checkpoint_out)
    _save_checkpoint_meta(args.checkpoint_out, train_feats.scaler, config)
    if args.log_out:
        gatnet.save_training_log(log, args.log_out)
    print(json.dumps({"epochs": len(log) - 1, "best_val": min(e["val_loss"] for e in log)}))
    return 0


def cmd_embed(args) -> int:
    corpus = _load(args)
    params = gatnet.load_checkpoint(args.checkpoint)
    meta, scaler = _load_checkpoint_meta(args.checkpoint)
    config = PipelineConfig()
    if meta:
        config.blocks = meta["blocks"]
        config.hash_dim = meta["hash_dim"]
        config.standardize_temporal = meta["standardize_temporal"]
    blocks = _blocks_from_config(config)
    graph = trg.build_graph(corpus)
    feats = trg.assemble_features(corpus, graph, blocks, scaler=scaler)
    emb = gatnet.gat_forward(graph, feats, params)
    save_features(emb, args.out)
    print(json.dumps({"rows": emb.shape[0], "cols": emb.shape[1]}))
    return 0


def cmd_cluster(args) -> int:
    corpus = _load(args)
    emb = load_features(args.embeddings)
    if emb.shape[0] != len(corpus.tweets):
        raise DataValidationError("embedding rows do not match corpus")
    if args.eps == "auto":
        labels = [t.gold_event_id for t in corpus.tweets]
        if not any(lab is not None for lab in labels):
            raise DataValidationError("eps=auto needs gold event labels on the corpus")
        eps, _ = clustering.choose_eps(emb, labels, min_pts=args.min_pts, noise_mode=args.noise_mode)
    else:
        eps = float(args.eps)
    assignment = clustering.dbscan(emb, clustering.DbscanConfig(eps=eps, min_pts=args.min_pts))
    events = clustering.filter_clusters(assignment, corpus, threshold=args.filter_threshold)
    pipeline.write_events(events, args.out)
    print(
        json.dumps(
            {
                "eps": eps,
                "clusters": assignment.n_clusters,
                "noise": int((assignment.labels < 0).sum()),
                "events": len(events),
            }
        )
    )
    return 0


def cmd_detect(args) -> int:
    config = _config_from_args(args)
    if args.merge:
        config.merge = True
    corpus = _load(args)
    gazetteer = None
    if args.gazetteer:
        gazetteer = entities.Gazetteer.from_tsv(args.gazetteer)

    if args.train:
        train_c, val_c, _ = split_corpus_by_events(corpus)
        labeled = [i for i, t in enumerate(corpus.tweets) if t.gold_categories is not None]
        sub = corpus.subset(labeled)
        features = trg.text_matrix(sub, config.hash_dim)
        gold = cat.labels_to_matrix([t.gold_categories for t in sub.tweets])
        model, _ = cat.train_categorizer(
            features,
            gold,
            cat.CategorizerConfig(
                learning_rate=config.cat_learning_rate,
                batch_size=config.cat_batch_size,
                patience=config.cat_patience,
                max_epochs=config.cat_max_epochs,
                pos_weight=config.pos_weight,
                threshold=config.cat_threshold,
                seed=config.seed,
            ),
        )
        blocks = _blocks_from_config(config)
        tg = trg.build_graph(train_c, self_loops=config.self_loops, max_posting=config.max_posting or None)
        tf = trg.assemble_features(train_c, tg, blocks)
        vg = trg.build_graph(val_c, self_loops=config.self_loops, max_posting=config.max_posting or None)
        vf = trg.assemble_features(val_c, vg, blocks, scaler=tf.scaler)
        params, _ = gatnet.train(
            tg,
            tf,
            [t.gold_event_id for t in train_c.tweets],
            gatnet.TrainConfig(
                learning_rate=config.learning_rate,
                margin=config.margin,
                patience=config.patience,
                max_epochs=config.max_epochs,
                seed=config.seed,
            ),
            val_graph=vg,
            val_features=vf,
            val_labels=[t.gold_event_id for t in val_c.tweets],
            embed_dim=config.embed_dim,
            n_layers=config.n_layers,
            heads=config.heads,
            leaky_slope=config.leaky_slope,
        )
        scaler = tf.scaler
    else:
        if not config.categorizer_model or not config.checkpoint:
            raise UsageError("detect needs categorizer_model and checkpoint in the config, or --train")
        model = cat.CategorizerModel.load(config.categorizer_model)
        params = gatnet.load_checkpoint(config.checkpoint)
        _, scaler = _load_checkpoint_meta(config.checkpoint)

    result = pipeline.run_detect(config, corpus, model, params, gazetteer=gazetteer, scaler=scaler)
    pipeline.write_events(result.events, args.out)
    report = result.timings.report()
    report.update({"windows": result.n_windows, "gated_tweets": result.n_gated, "eps": result.eps})
    if args.timings_out:
        with open(args.timings_out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True)
            fh.write("\n")
    print(json.dumps({"events": len(result.events), **report}))
    return 0


def cmd_evaluate(args) -> int:
    corpus = _load(args)
    events = _load_events(args.events)
    gold = {t.tweet_id: t.gold_event_id for t in corpus.tweets}
    tweet_categories = {
        t.tweet_id: sorted(t.gold_categories) for t in corpus.tweets if t.gold_categories
    }
    report: dict = {}

    # clustering metrics over gold-labeled tweets; unclustered ones are singletons
    assigned: dict[str, int] = {}
    for ei, ev in enumerate(events):
        for tid in ev.tweet_ids:
            assigned.setdefault(tid, ei)
    truth, pred = [], []
    next_singleton = len(events)
    for t in corpus.tweets:
        if t.gold_event_id is None:
            continue
        truth.append(t.gold_event_id)
        if t.tweet_id in assigned:
            pred.append(assigned[t.tweet_id])
        else:
            pred.append(next_singleton)
            next_singleton += 1
    if truth:
        report["clustering"] = {
            "ami": evalmetrics.ami(truth, pred),
            "ari": evalmetrics.ari(truth, pred),
            "nmi": evalmetrics.nmi(truth, pred),
        }

    event_report = evalmetrics.event_eval(
        [ev.tweet_ids for ev in events],
        gold,
        purity_threshold=args.purity_threshold,
        tweet_categories=tweet_categories,
    )
    report["events"] = event_report.to_json()

    if args.pred_categories:
        pred_sets = {}
        with open(args.pred_categories, "r", encoding="utf-8") as fh:
            for raw in fh:
                if raw.strip():
                    rec = json.loads(raw)
                    pred_sets[rec["tweet_id"]] = rec.get("categories", [])
        ids = [t.tweet_id for t in corpus.tweets if t.gold_categories is not None]
        gold_mat = cat.labels_to_matrix(
            [t.gold_categories for t in corpus.tweets if t.gold_categories is not None]
        )
        pred_mat = cat.labels_to_matrix([pred_sets.get(tid, []) for tid in ids])
        report["multilabel"] = evalmetrics.multilabel_metrics(gold_mat, pred_mat)

    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_score_users(args) -> int:
    corpus = _load(args)
    events = _load_events(args.events)
    windows = window_stream(corpus, parse_duration(args.length), parse_duration(args.stride))
    category = None if args.category == "all" else args.category
    scores = userscore.rank_users(events, corpus, windows, category=category)
    if args.top:
        scores = scores[: args.top]
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for s in scores:
            out.write(
                json.dumps(
                    {"user_id": s.user_id, "score": s.score, "windows": s.windows, "followers": s.followers}
                )
                + "\n"
            )
    finally:
        if args.out:
            out.close()
    return 0


def cmd_export_trend(args) -> int:
    corpus = _load(args)
    events = _load_events(args.events)
    rows = pipeline.export_trend(events, corpus, parse_duration(args.bucket), args.out)
    print(json.dumps({"rows": len(rows)}))
    return 0


def cmd_gen_synthetic(args) -> int:
    cfg = synth.SynthConfig(
        n_events=args.events,
        tweets_per_event=args.tweets_per_event,
        n_noise=args.noise,
        shared_fraction=args.shared_fraction,
        seed=args.seed,
        start=args.start,
        event_spacing_hours=args.event_spacing,
        event_duration_hours=args.event_duration,
        entity_keys_per_event=args.entity_keys,
        spam_events=args.spam_events,
    )
    corpus = synth.generate_corpus(cfg)
    save_corpus(corpus, args.out)
    if args.gazetteer_out:
        gaz = synth.synthetic_gazetteer(cfg)
        with open(args.gazetteer_out, "w", encoding="utf-8") as fh:
            fh.write("# synthetic gazetteer\n")
            for key in sorted(gaz.entries):
                fh.write(f"{key}\t{gaz.entries[key]}\n")
    print(json.dumps({"tweets": len(corpus.tweets), "out": args.out}))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tweetsieve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a tweet JSONL (+ optional features)")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--out", help="write the canonical JSONL form here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("window", help="slice a corpus into stream windows")
    p.add_argument("--input", required=True)
    p.add_argument("--length", default="6h")
    p.add_argument("--stride", default="4h")
    p.add_argument("--out")
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("extract-entities", help="gazetteer entity extraction")
    p.add_argument("--input", required=True)
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--types-manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_entities)

    p = sub.add_parser("ner-eval", help="exact-match span scoring of annotations")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(func=cmd_ner_eval)

    p = sub.add_parser("train-categorizer", help="train the multi-label tagger")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--hash-dim", type=int, default=768, dest="hash_dim")
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--max-epochs", type=int, default=200, dest="max_epochs")
    p.add_argument("--pos-weight", type=float, default=0.8, dest="pos_weight")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_categorizer)

    p = sub.add_parser("tag-categories", help="tag tweets with a trained model")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--hash-dim", type=int, default=768, dest="hash_dim")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tag_categories)

    p = sub.add_parser("build-graph", help="entity-sharing graph over a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--self-loops", choices=("on", "off"), default="on", dest="self_loops")
    p.add_argument("--max-posting", type=int, default=0, dest="max_posting")
    p.add_argument("--blocks", help="also assemble node features, e.g. text,temporal")
    p.add_argument("--hash-dim", type=int, default=768, dest="hash_dim")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train", help="train the graph attention embedder")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--train-features", dest="train_features")
    p.add_argument("--val-features", dest="val_features")
    p.add_argument("--config")
    p.add_argument("--lr", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--patience", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--embed-dim", type=int, dest="embed_dim")
    p.add_argument("--checkpoint-out", required=True, dest="checkpoint_out")
    p.add_argument("--log-out", dest="log_out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="embed a corpus with a trained checkpoint")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", help="density-cluster embeddings into events")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--eps", default="auto")
    p.add_argument("--min-pts", type=int, default=3, dest="min_pts")
    p.add_argument("--filter-threshold", type=float, default=0.80, dest="filter_threshold")
    p.add_argument("--noise-mode", choices=("singleton", "single-cluster"), default="singleton", dest="noise_mode")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("detect", help="full pipeline: tag, gate, embed, cluster, filter")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--config")
    p.add_argument("--gazetteer")
    p.add_argument("--train", action="store_true", help="train models from the corpus first")
    p.add_argument("--merge", action="store_true", help="merge events re-detected across overlapping windows")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps")
    p.add_argument("--out", required=True)
    p.add_argument("--timings-out", dest="timings_out")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="clustering, event, and multi-label metrics")
    p.add_argument("--input", required=True, help="gold corpus JSONL")
    p.add_argument("--features")
    p.add_argument("--events", required=True)
    p.add_argument("--pred-categories", dest="pred_categories")
    p.add_argument("--purity-threshold", type=float, default=0.5, dest="purity_threshold")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("score-users", help="rank informative users")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--events", required=True)
    p.add_argument("--length", default="6h")
    p.add_argument("--stride", default="4h")
    p.add_argument("--category", default="all")
    p.add_argument("--top", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score_users)

    p = sub.add_parser("export-trend", help="per-bucket event volume table")
    p.add_argument("--input", required=True)
    p.add_argument("--features")
    p.add_argument("--events", required=True)
    p.add_argument("--bucket", default="6h")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_trend)

    p = sub.add_parser("gen-synthetic", help="seeded synthetic corpus")
    p.add_argument("--events", type=int, default=20)
    p.add_argument("--tweets-per-event", type=int, default=10, dest="tweets_per_event")
    p.add_argument("--noise", type=int, default=100)
    p.add_argument("--shared-fraction", type=float, default=0.3, dest="shared_fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="2022-06-01T00:00:00Z")
    p.add_argument("--event-spacing", type=float, default=8.0, dest="event_spacing")
    p.add_argument("--event-duration", type=float, default=4.0, dest="event_duration")
    p.add_argument("--entity-keys", type=int, default=4, dest="entity_keys")
    p.add_argument("--spam-events", type=int, default=0, dest="spam_events")
    p.add_argument("--out", required=True)
    p.add_argument("--gazetteer-out", dest="gazetteer_out")
    p.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataValidationError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
