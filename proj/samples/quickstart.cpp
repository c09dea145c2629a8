// Trains both systems on a small synthetic corpus and prints dev scores.
#include <iostream>

#include "triclass.hpp"

using namespace triclass;

int main() {
  SyntheticSpec spec;
  spec.instances = 600;
  spec.seed = 7;
  spec.split = "train";
  const Corpus train = generate_synthetic(spec);
  spec.instances = 200;
  spec.seed = 8;
  spec.split = "dev";
  spec.id_prefix = "dev";
  const Corpus dev = generate_synthetic(spec);

  TrainOptions options;
  options.seed = 1;
  options.features = 30000;
  options.k = 1;
  for (System s : {System::s2, System::s1}) {
    const TrainResult trained = train_system(s, train, &dev, options);
    const EvalReport report = make_report(trained.model.predict(dev, options.threads), dev);
    std::cout << render_report(report, std::string(system_name(s)) + " on synthetic dev") << '\n';
  }

  // A single prediction with the KNN system.
  const KnnModel knn = knn_fit(train, Task::gender, select_features(train, Task::gender, 500), 3);
  const int label = knn.predict_text(dev.instances.front().text);
  std::cout << dev.instances.front().id << " gender=" << label_name(Task::gender, label) << '\n';
}
