# coding: utf-8

# # Softmax models and their gradients
#
# Forward pass, analytic gradients, and a finite-difference check.

# In[1]:

import numpy as np

from forgetbench import LossFunction, LogisticModel, MlpModel, SgdConfig, forward, gradient_check, train
from forgetbench.data import BlobSpec, gen_blobs

model = LogisticModel([[1.0, 0.0]], [0.0, 0.0])
print(forward(model, [2.0]))          # softmax([2, 0])
print(np.exp(2) / (np.exp(2) + 1))


# In[2]:

rng = np.random.default_rng(0)
ce = LossFunction("cross_entropy")
errors = []
for trial in range(20):
    m = MlpModel.initialize(4, 3, (8, 5), "tanh", seed=trial)
    errors.append(gradient_check(m, (rng.uniform(size=4), int(rng.integers(3))), ce))
print("worst relative error:", max(errors))


# Train on two separable blobs.

# In[3]:

data = gen_blobs(BlobSpec(((0.25, 0.5), (0.75, 0.5)), (0.05, 0.05), (10, 10)), seed=3)
m = LogisticModel.initialize(2, 2, seed=0)
log = train(m, data, ce, SgdConfig(learning_rate=0.5, epochs=200, batch_size=4, seed=1))
print("epoch 1  :", log.records[0].train_loss, log.records[0].train_accuracy)
print("epoch 200:", log.records[-1].train_loss, log.records[-1].train_accuracy)
