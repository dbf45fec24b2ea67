import init, { punctuateCaptions, scorePair, strategySweep } from "./pkg/caster_punct_wasm.js";

const SAMPLE = `WEBVTT

00:00:00.000 --> 00:00:02.400
dragon is up in thirty seconds

00:00:02.400 --> 00:00:04.800
both teams start grouping near the pit

00:00:04.800 --> 00:00:07.200
the smite war is going to decide this

00:00:07.200 --> 00:00:09.600
and they secure it with a clean smite

00:00:09.600 --> 00:00:12.000
red side has the baron vision now
`;

const $ = (id) => document.getElementById(id);

function el(tag, attrs = {}, ...children) {
  const node = document.createElement(tag);
  Object.assign(node, attrs);
  for (const child of children) node.append(child);
  return node;
}

function table(headers, rows) {
  const head = el("tr", {}, ...headers.map((h) => el("th", { textContent: h })));
  const body = rows.map((cells) =>
    el("tr", {}, ...cells.map((c) => (c instanceof Node ? el("td", {}, c) : el("td", { textContent: String(c), className: typeof c === "number" ? "num" : "" })))),
  );
  return el("table", {}, head, ...body);
}

function show(target, render) {
  const out = $(target);
  out.replaceChildren();
  try {
    out.append(render());
  } catch (err) {
    out.append(el("p", { className: "error", textContent: String(err) }));
  }
}

const pct = (x) => (100 * x).toFixed(2);

function punctuate() {
  show("punctuate-out", () => {
    const view = JSON.parse(punctuateCaptions($("captions").value, $("format").value, Number($("k").value), $("keep").checked));
    const rows = view.sentences.map((s, i) => [
      i,
      `${s.first_cue}-${s.last_cue}`,
      el("span", { textContent: s.rendered, className: s.complete ? "" : "incomplete" }),
    ]);
    const pairs = view.pairs.map((p) => [p.context, p.target]);
    return el(
      "div",
      {},
      el("p", { textContent: `${view.cue_count} cues, strategy ${view.strategy}: ${view.sentences.length} sentences, ${view.pairs.length} pairs` }),
      table(["#", "cues", "sentence"], rows),
      table(["context", "target"], pairs),
    );
  });
}

function sweep() {
  show("sweep-out", () => {
    const rows = JSON.parse(strategySweep($("captions").value, $("format").value));
    return table(
      ["strategy", "sentences", "pairs", "mean context tokens", "mean target tokens"],
      rows.map((r) => [r.strategy, r.sentences, r.stats.pair_count, Number(r.stats.mean_context_tokens.toFixed(2)), Number(r.stats.mean_target_tokens.toFixed(2))]),
    );
  });
}

function tokens(list, matched) {
  return el("div", {}, ...list.map((t, i) => el("span", { className: matched.has(i) ? "tok hit" : "tok", textContent: t })));
}

function score() {
  show("score-out", () => {
    const v = JSON.parse(scorePair($("candidate").value, $("reference").value));
    const prf = (x) => `P ${pct(x.precision)}  R ${pct(x.recall)}  F ${pct(x.f1)}`;
    return el(
      "div",
      {},
      table(
        ["metric", "value"],
        [
          ["BLEU", pct(v.bleu)],
          ["ROUGE-1", prf(v.rouge1)],
          ["ROUGE-2", prf(v.rouge2)],
          ["ROUGE-L", prf(v.rougeL)],
          ["METEOR", pct(v.meteor)],
        ],
      ),
      el("p", { textContent: `METEOR alignment: ${v.alignment.length} matches in ${v.chunks} chunk(s)` }),
      tokens(v.candidate_tokens, new Set(v.alignment.map(([c]) => c))),
      tokens(v.reference_tokens, new Set(v.alignment.map(([, r]) => r))),
    );
  });
}

await init();
$("captions").value = SAMPLE;
$("run-punctuate").addEventListener("click", punctuate);
$("run-sweep").addEventListener("click", sweep);
$("run-score").addEventListener("click", score);
punctuate();
