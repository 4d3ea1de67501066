// Trains an H-RGN on generated families with fold 1 held out, then scores a
// few held-out parent/child pairs and saves the model.
//
//   verify_pair [checkpoint-path]

#include <cstdio>
#include <iostream>

#include "rgn/rgn.hpp"

using namespace rgn;

int main(int argc, char** argv) {
  SynthConfig sc;
  sc.n_families = 200;
  const SynthData data = synth_generate(sc);
  const Split split = cv_split(data.manifest, 1, 7);

  HRgnConfig cfg;
  cfg.d = sc.d_raw;
  cfg.latent = {8, 4};
  cfg.dims = {16, 4};
  HRgn model(cfg, 7);
  std::cout << "hierarchy over " << cfg.d << " feature nodes:\n";
  model.topology().dump(std::cout);

  PrecomputedExtractor extractor(sc.d_raw);
  TrainConfig tc;
  tc.epochs = 60;
  const RunRecord run = train(tc, split, data.features, model, extractor);
  const EvalPoint& last = run.points.back();
  std::printf("\ntrained %zu iterations: loss %.4f, train acc %.3f, held-out acc %.3f\n\n", last.iteration,
              last.train_loss, last.train_accuracy, last.test_accuracy);

  std::printf("%-20s %-5s %-6s %-8s %s\n", "pair", "rel", "label", "p(kin)", "decision");
  int shown[2] = {0, 0};
  for (const Pair& p : split.test) {
    if (shown[p.label]++ >= 4) continue;
    const real prob = model.probabilities(make_batch({p}, data.features), &extractor)[0];
    std::printf("%-20s %-5s %-6d %-8.4f %s\n", p.pair_id.c_str(), std::string(to_string(p.relation)).c_str(), p.label,
                double(prob), prob >= 0.5 ? "kin" : "not kin");
  }

  if (argc > 1) {
    save_checkpoint(argv[1], checkpoint_store(model, extractor));
    std::cout << "\nsaved " << argv[1] << '\n';
  }
  return 0;
}
