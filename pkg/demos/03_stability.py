# coding: utf-8

# # Repeated epochs on the same data
#
# Ten passes over the WBC training split. For the representation learner the
# store stops changing after the first pass; the MLP keeps moving its weights.

# In[1]:

from pathlib import Path

from forgetbench import MlpLearner, RepresentationLearner, SgdConfig, SplitSpec, load_wbc, run_overfitting, split

DATA = Path(__file__).resolve().parents[1] / "data"
task = split(load_wbc(DATA / "wdbc.data"), SplitSpec(seed=7))

rep = run_overfitting(RepresentationLearner(), task, epochs=10)
for r in rep.records:
    print(r.epoch, f"{r.test_accuracy:.4f}", r.changed, r.fingerprint[:12])
print("stabilised after epoch", rep.last_changed_epoch)


# In[2]:

mlp = run_overfitting(MlpLearner(config=SgdConfig(learning_rate=0.5, batch_size=16, seed=7)), task, epochs=10)
for r in mlp.records:
    print(r.epoch, f"train {r.train_accuracy:.4f} test {r.test_accuracy:.4f} loss {r.train_loss:.4f}")
print("test predictions constant:", mlp.predictions_constant)
