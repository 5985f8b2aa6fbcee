# coding: utf-8

# # Forgetting on a conflicting pair
#
# Same 2-D inputs, opposite labels. An MLP trained with SGD on task A and
# then on task B has to overwrite its weights; the representation learner
# files the second task under a new tag.

# In[1]:

import numpy as np

from forgetbench import MlpLearner, RepresentationLearner, SgdConfig, make_conflicting_tasks, run_forgetting

a, b = make_conflicting_tasks(seed=42)
print(a.name, a.train.class_counts(), b.name, b.train.class_counts())
# every test input of A carries the opposite label under B
print("disagreement:", np.mean((a.test.X[:, 0] < 0.5).astype(int) != a.test.y))


# In[2]:

mlp = run_forgetting(lambda: MlpLearner((16,), "tanh", SgdConfig(learning_rate=0.5, batch_size=16, seed=7)),
                     a, b, epochs=10)
rep = run_forgetting(RepresentationLearner, a, b, epochs=10)

for r in (mlp, rep):
    print(f"{r.learner_kind:15s} A before {r.acc_a_before:.2f}  B {r.acc_b:.2f}  "
          f"A after {r.acc_a_after:.2f}  delta {r.forgetting_delta:+.2f}")


# The MLP ends up predicting task B's labels for task A's points, which is
# exactly the flip the construction forces.

# In[3]:

flipped = np.mean(np.array(mlp.predictions_a_before) != np.array(mlp.predictions_a_after))
print(f"fraction of task-A predictions that changed: {flipped:.2f}")
