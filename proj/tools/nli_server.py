#!/usr/bin/env python3
"""Serves an MNLI-style sequence classifier behind the entailment scoring API.

POST /nli/score {"pairs": [{"premise": ..., "hypothesis": ...}, ...]}
  -> {"scores": [{"entailment": p, "neutral": p, "contradiction": p}, ...]}

Usage: nli_server.py [--model roberta-large-mnli] [--port 8000] [--device cpu]
"""

import argparse
import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

LABELS = ("entailment", "neutral", "contradiction")


class Scorer:
    def __init__(self, model_name, device):
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_name)
        self.model.to(device).eval()
        self.device = device
        id2label = {i: l.lower() for i, l in self.model.config.id2label.items()}
        missing = set(LABELS) - set(id2label.values())
        if missing:
            raise SystemExit(f"model has no {sorted(missing)} label(s): {id2label}")
        self.columns = [next(i for i, l in id2label.items() if l == name) for name in LABELS]

    @torch.no_grad()
    def score(self, pairs):
        batch = self.tokenizer(
            [p["premise"] for p in pairs],
            [p["hypothesis"] for p in pairs],
            padding=True,
            truncation=True,
            return_tensors="pt",
        ).to(self.device)
        logits = self.model(**batch).logits.double().cpu().numpy()[:, self.columns]
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        return [dict(zip(LABELS, map(float, row))) for row in probs]


def make_handler(scorer):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path != "/nli/score":
                self._reply(404, {"error": "unknown path"})
                return
            try:
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                pairs = body["pairs"]
                if not pairs:
                    raise ValueError("empty pair list")
            except (KeyError, TypeError, ValueError) as e:
                self._reply(400, {"error": f"bad request: {e}"})
                return
            self._reply(200, {"scores": scorer.score(pairs)})

        def _reply(self, status, doc):
            data = json.dumps(doc).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, fmt, *args):
            logging.debug(fmt, *args)

    return Handler


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", default="roberta-large-mnli")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--device", default="cuda" if torch.cuda.is_available() else "cpu")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO)

    scorer = Scorer(args.model, args.device)
    server = ThreadingHTTPServer((args.host, args.port), make_handler(scorer))
    logging.info("serving %s on %s:%d", args.model, args.host, args.port)
    server.serve_forever()


if __name__ == "__main__":
    main()
