"""Training the message-passing network on a synthetic chirality task.

Class 0 graphs are consistently handed helices; class 1 graphs are their
exact mirror images. Only a chirality-aware descriptor can tell them
apart, and the gamma channel of the quadruplet carries exactly that bit.
"""

from romgcn import ModelConfig, TrainOptions, evaluate, gen_chirality_dataset, train
from romgcn.evaluation import kfold

dataset = gen_chirality_dataset(40, seed=2)
print(f"dataset: {len(dataset.graphs)} graphs, {dataset.class_count} classes")
print(f"class weights: {dataset.class_weights}")

split = kfold(dataset.labels, k=5, seed=0)
train_graphs = [dataset.graphs[i] for i in split.train_indices(0)]
test_graphs = [dataset.graphs[i] for i in split.test_indices(0)]
print(f"fold 0: {len(train_graphs)} train / {len(test_graphs)} test graphs")

config = ModelConfig(
    node_input_width=dataset.feature_width,
    class_count=dataset.class_count,
    width=32,
    depth=2,
    norm="batch",
)
opts = TrainOptions(epochs=10, batch_size=16, lr=1e-3, seed=0)

params, history = train(
    train_graphs,
    config,
    opts,
    class_weights=dataset.class_weights,
    eval_graphs=test_graphs,
)

print("\nepoch  lr        train-loss  test-acc  test-auc")
for row in history:
    print(
        f"{row['epoch']:>5}  {row['lr']:.1e}  {row['loss']:>10.4f}  "
        f"{row['test_accuracy']:>8.3f}  {row['test_auc']:>8.3f}"
    )

final = evaluate(params, test_graphs, dataset.class_weights)
print(f"\nheld-out fold: accuracy {final['accuracy']:.3f}, auc {final['auc']:.3f}, f1 {final['f1']:.3f}")
