"""Smoke test for the dataprobe_py extension.

Build and install first:

    pip install --no-build-isolation ./crates/py

then run `python python/smoke_test.py`.
"""

import json
import math
import os
import tempfile

import dataprobe_py as dp


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print(f"ok  {what}")


def main():
    chain = dp.MarkovChain.generate(m=16, alpha=0.1, target_entropy=1.0, num_candidates=50, seed=3)
    check(abs(chain.entropy_rate - 1.0) < 0.05, f"entropy rate near target ({chain.entropy_rate:.4f})")
    check(abs(sum(chain.stationary) - 1.0) < 1e-12, "stationary sums to one")
    check(chain.stationary_residual() < 1e-9, "stationary residual small")

    again = dp.MarkovChain.generate(m=16, alpha=0.1, target_entropy=1.0, num_candidates=50, seed=3)
    check(again.matrix == chain.matrix, "generation is deterministic")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "chain.json")
        chain.save(path)
        loaded = dp.MarkovChain.load(path)
        check(loaded.matrix == chain.matrix, "chain file round trip")

    corpus = chain.sample(n=64, count=300, seed=1)
    check(len(corpus) == 300 and all(len(x) == 64 for x in corpus), "sample shape")
    nlls = chain.nll_batch(corpus)
    mean = sum(nlls) / len(nlls)
    check(abs(mean - chain.entropy_rate) < 0.1, f"mean NLL of chain samples near H ({mean:.4f})")

    cycle = dp.MarkovChain.from_rows([[0.0, 1.0], [1.0, 0.0]])
    check(cycle.nll([0, 1, 0, 1]) == 0.0, "deterministic cycle has zero NLL")
    check(math.isinf(cycle.nll([0, 0, 1])), "off-support sequence has infinite NLL")
    check(abs(cycle.nll([0, 1], mode="joint") - 0.5) < 1e-12, "joint NLL includes the first token")

    model = dp.NGramModel.fit(corpus, m=16)
    check(model.order == 1 and model.lam == 0.5, "default k=1, lambda=0.5")
    p = model.next_token_distribution([0])
    check(abs(sum(p) - 1.0) < 1e-12, "model distribution normalised")

    q = dp.apply_temperature([0.7, 0.2, 0.1], 1.0)
    check(q == [0.7, 0.2, 0.1], "T=1 leaves probabilities unchanged")
    sharp = dp.apply_temperature([0.7, 0.2, 0.1], 0.5)
    check(sharp[0] > 0.7, "T<1 sharpens")

    prompts = [[x[0]] for x in corpus[:100]]
    band = dp.TypicalSetBand(chain.entropy_rate, epsilon=0.2)
    scores = {}
    for label, t in [("greedy", None), ("1.0", 1.0), ("1.5", 1.5)]:
        out = model.decode(prompts, temperature=t, max_new_tokens=63, seed=5)
        summary = band.summarize(chain.nll_batch(out))
        scores[label] = summary["regime_score"]
        print(f"    {label:>6}: regime score {summary['regime_score']:.3f}, "
              f"off-support {summary['off_support_fraction']:.3f}")
    check(scores["greedy"] < scores["1.0"] < scores["1.5"], "regime score rises with temperature")
    check(model.decode(prompts, None, 10, 0) == model.decode(prompts, None, 10, 99), "greedy ignores seed")

    check(band.classify(band.lower - 1e-9) == "over_conservative", "below band")
    check(band.classify(band.lower) == "typical", "band is closed")
    check(band.classify(math.inf) == "uncertain", "infinite NLL is uncertain")

    check(dp.transfer_decision(True, True) == "transfer_supported", "IV=1 EV=1")
    check(dp.transfer_decision(True, False) == "probe_local", "IV=1 EV=0")
    check(dp.transfer_decision(False, True) == "rejected", "IV=0")
    check(dp.transfer_decision(True) == "pending", "no real side")

    try:
        dp.MarkovChain.generate(m=1, alpha=0.1, target_entropy=0.0)
    except ValueError as e:
        check("m" in str(e), "bad parameter raises ValueError")
    else:
        raise AssertionError("m=1 accepted")

    with tempfile.TemporaryDirectory() as d:
        chain.save(os.path.join(d, "chain.json"))
        spec = {
            "chain": "chain.json",
            "max_new_tokens": 31,
            "claims": [{
                "claim": {"id": "t", "knob": "temperature", "from": "greedy", "to": "1.5",
                          "diagnostic": "regime_score"},
                "binding": {"direction": 1, "margin": 0.2,
                            "predicates": [{"kind": "one_sided_permutation"}, {"kind": "ci_excludes_zero"}]},
            }],
            "contrast": {"samples_per_arm": 30, "seeds": [1, 2, 3], "permutations": 199,
                         "bootstrap_resamples": 500},
        }
        spec_path = os.path.join(d, "spec.json")
        with open(spec_path, "w") as f:
            json.dump(spec, f)
        criteria = dp.check_spec(spec_path)
        check(all(criteria[c] for c in ("c1", "c2", "c3", "c4")), "criteria hold")
        probe = dp.run_claim(spec_path)
        check(probe["delta"] > 0.2, f"probe delta {probe['delta']:.3f}")
        v = dp.verdict(spec_path, probe)
        check(v["iv"] and v["status"] == "pending", "IV holds, pending without real side")

        csv_path = os.path.join(d, "real.csv")
        with open(csv_path, "w") as f:
            f.write("arm,seed,diagnostic_value\n")
            for s in range(1, 6):
                f.write(f"greedy,{s},{0.1 * s}\n1.5,{s},{0.1 * s + 0.5}\n")
        real = dp.ingest_real_csv(spec_path, csv_path)
        v = dp.verdict(spec_path, probe, real)
        check(v["status"] == "transfer_supported", "real side agrees")

    print("smoke test passed")


if __name__ == "__main__":
    main()
