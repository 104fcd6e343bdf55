"""
Rprop on XOR
============

Trains a 2-4-1 perceptron on the four XOR patterns and prints the
error curve every 50 epochs, then shows the step-size schedule on a
one-parameter quadratic.
"""

import numpy as np

from creditlab import neural as nn

X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
d = np.array([0, 1, 1, 0], dtype=float)

net = nn.init_network([2, 4, 1], 3)
trained, history = nn.train_rprop(net, X, d, nn.TrainConfig(epochs=500))
for epoch in range(0, 500, 50):
    print(f"epoch {epoch:3d}  half-sum error {history.errors[epoch]:.6f}")
print("outputs:", np.round(nn.forward(trained, X), 4))

# Step sizes on f(w) = (w - 0.2)^2 / 2: they grow by 1.2 while the
# gradient keeps its sign and halve when it flips.
opt = nn.Rprop(1, nn.TrainConfig())
w = np.zeros(1)
for k in range(8):
    w = opt.step(w, w - 0.2)
    print(f"step {k + 1}: w = {w[0]:.5f}  delta = {opt.delta[0]:.5f}")
