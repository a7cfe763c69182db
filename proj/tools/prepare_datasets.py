#!/usr/bin/env python3
"""Convert public benchmark graphs into the canonical dataset directory layout.

Layout written per dataset:
    meta.json     {"name", "directed", "num_classes", "num_nodes"[, "identity_features"]}
    edges.tsv     "<src>\t<dst>" per line, 0-based node ids
    features.tsv  "<row>\t<col>\t<value>" sparse triplets (omitted for identity features)
    labels.tsv    "<node>\t<class>" per labeled node

Supported sources:
    cora      LINQS cora.content / cora.cites (directed, citing -> cited)
    citeseer  Planetoid ind.citeseer.* pickles (edge direction is not preserved
              in that release, so the graph is written as undirected)
    airports  struc2vec "<name>-airports.edgelist" + "labels-<name>-airports.txt"

The LINQS and Planetoid files ship inside the `pgl` wheel on PyPI
(pgl/data/cora, pgl/data/citeseer):

    pip download --no-deps pgl==2.2.6 -d /tmp/pgl
    python3 -c "import zipfile,glob; zipfile.ZipFile(glob.glob('/tmp/pgl/*.whl')[0]).extractall('/tmp/pgl/x')"
    python3 tools/prepare_datasets.py cora /tmp/pgl/x/pgl/data/cora data/cora
    python3 tools/prepare_datasets.py citeseer /tmp/pgl/x/pgl/data/citeseer data/citeseer
"""

import argparse
import json
import os
import pickle
import sys


def write_dataset(out, name, directed, num_nodes, edges, labels, num_classes,
                  features=None):
    os.makedirs(out, exist_ok=True)
    meta = {"name": name, "directed": directed, "num_classes": num_classes,
            "num_nodes": num_nodes}
    if features is None:
        meta["identity_features"] = True
    with open(os.path.join(out, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    with open(os.path.join(out, "edges.tsv"), "w") as f:
        for u, v in edges:
            f.write(f"{u}\t{v}\n")
    with open(os.path.join(out, "labels.tsv"), "w") as f:
        for v in sorted(labels):
            f.write(f"{v}\t{labels[v]}\n")
    if features is not None:
        with open(os.path.join(out, "features.tsv"), "w") as f:
            for r, c, val in features:
                f.write(f"{r}\t{c}\t{val:g}\n")


def convert_cora(src, out):
    ids, labels, feats, classes = {}, {}, [], {}
    with open(os.path.join(src, "cora.content")) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            node = ids.setdefault(parts[0], len(ids))
            words = parts[1:-1]
            for c, w in enumerate(words):
                if w != "0":
                    feats.append((node, c, float(w)))
            labels[node] = classes.setdefault(parts[-1], len(classes))
    edges = []
    with open(os.path.join(src, "cora.cites")) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            cited, citing = parts
            if cited in ids and citing in ids:
                edges.append((ids[citing], ids[cited]))
    write_dataset(out, "cora", True, len(ids), edges, labels, len(classes), feats)


def _load_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def convert_planetoid(src, out, name):
    import numpy as np
    import scipy.sparse as sp

    pre = os.path.join(src, f"ind.{name}.")
    allx, ally = _load_pickle(pre + "allx"), _load_pickle(pre + "ally")
    tx, ty = _load_pickle(pre + "tx"), _load_pickle(pre + "ty")
    graph = _load_pickle(pre + "graph")
    with open(pre + "test.index") as f:
        test_idx = [int(l) for l in f if l.strip()]

    # Planetoid leaves holes in the test index range for isolated nodes.
    lo, hi = min(test_idx), max(test_idx)
    tx_full = sp.lil_matrix((hi - lo + 1, tx.shape[1]))
    ty_full = np.zeros((hi - lo + 1, ty.shape[1]))
    for row, idx in enumerate(test_idx):
        tx_full[idx - lo] = tx[row]
        ty_full[idx - lo] = ty[row]
    x = sp.vstack([allx, tx_full]).tocsr()
    y = np.vstack([ally, ty_full])
    n = max(x.shape[0], max(graph) + 1)

    labels = {v: int(np.argmax(y[v])) for v in range(y.shape[0]) if y[v].sum() > 0}
    coo = x.tocoo()
    feats = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))
    edges = sorted({(min(u, v), max(u, v)) for u, nb in graph.items()
                    for v in nb if u != v})
    write_dataset(out, name, False, n, edges, labels, y.shape[1], feats)


def convert_airports(src, out, name):
    ids, edges, labels = {}, [], {}
    with open(os.path.join(src, f"{name}-airports.edgelist")) as f:
        for line in f:
            parts = line.split()
            if len(parts) >= 2:
                u = ids.setdefault(parts[0], len(ids))
                v = ids.setdefault(parts[1], len(ids))
                edges.append((u, v))
    with open(os.path.join(src, f"labels-{name}-airports.txt")) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                continue
            node = ids.setdefault(parts[0], len(ids))
            labels[node] = int(parts[1])
    num_classes = max(labels.values()) + 1
    write_dataset(out, name, False, len(ids), edges, labels, num_classes)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("kind", choices=["cora", "citeseer", "airports"])
    ap.add_argument("src")
    ap.add_argument("out")
    ap.add_argument("--name", default="brazil", help="airport network name")
    args = ap.parse_args()
    if args.kind == "cora":
        convert_cora(args.src, args.out)
    elif args.kind == "citeseer":
        convert_planetoid(args.src, args.out, "citeseer")
    else:
        convert_airports(args.src, args.out, args.name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
