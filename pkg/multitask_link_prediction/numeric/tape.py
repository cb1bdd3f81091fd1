""""""
import logging

import numpy as np

from multitask_link_prediction.errors import ContractViolation

logger = logging.getLogger(__name__)


class Tensor:
    """ A dense float64 array that may be recorded on a tape. """

    # make ndarray <op> Tensor dispatch to the Tensor operators
    __array_priority__ = 100

    def __init__(self, data, tape=None, index=None, name=None):
        """ Constructor.

        Parameters
        ----------
        data : array_like
            The values, converted to a float64 array.

        tape : Tape, optional
            The tape this tensor is recorded on. Tensors without a tape are
            constants.

        index : int, optional
            Position of this tensor on the tape.

        name : str, optional
            Name of the tensor if it is a leaf.
        """
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = tape
        self.index = index
        self.name = name

    def __repr__(self):
        kind = "constant" if self.tape is None else f"node {self.index}"
        return f"Tensor(shape={self.shape}, {kind})"

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        """ Get the value of a single-element tensor as a float. """
        return float(self.data.reshape(-1)[0])

    def __add__(self, other):
        return ops.add(self, other)

    def __radd__(self, other):
        return ops.add(other, self)

    def __sub__(self, other):
        return ops.subtract(self, other)

    def __rsub__(self, other):
        return ops.subtract(other, self)

    def __mul__(self, other):
        return ops.multiply(self, other)

    def __rmul__(self, other):
        return ops.multiply(other, self)

    def __truediv__(self, other):
        return ops.divide(self, other)

    def __rtruediv__(self, other):
        return ops.divide(other, self)

    def __neg__(self):
        return ops.negative(self)

    def __matmul__(self, other):
        return ops.matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = shape[0]
        return ops.reshape(self, tuple(shape))


class Tape:
    """ Reverse-mode record of tensor operations.

    Nodes are appended in evaluation order, so every node's inputs precede
    it. Leaves are named tensors (usually parameters) for which gradients
    are returned by :meth:`backward`.
    """

    def __init__(self):
        """ Constructor. """
        self._parents = []
        self._vjps = []
        self._shapes = []
        self.leaves = {}
        self.released = False

    def __len__(self):
        return len(self._vjps)

    def leaf(self, value, name):
        """ Register a leaf tensor.

        Parameters
        ----------
        value : array_like
            Value of the leaf.

        name : str
            Unique name of the leaf, used as key of the gradient map.

        Returns
        -------
        Tensor
            The leaf tensor recorded on this tape.
        """
        if name in self.leaves:
            raise ContractViolation(f"Duplicate leaf name: {name}")

        tensor = Tensor(value, tape=self, index=len(self), name=name)
        self._parents.append(())
        self._vjps.append(None)
        self._shapes.append(tensor.shape)
        self.leaves[name] = tensor.index

        return tensor

    def record(self, value, inputs, vjp):
        """ Record the result of an operation.

        Parameters
        ----------
        value : numpy.ndarray
            Forward value of the operation.

        inputs : sequence of Tensor
            Inputs of the operation.

        vjp : callable
            Function mapping the gradient w.r.t. the output to a sequence of
            gradients w.r.t. each input (``None`` where not needed).

        Returns
        -------
        Tensor
            The output tensor.
        """
        if self.released:
            raise ContractViolation("Cannot record on a released tape")

        parents = tuple(t.index if t.tape is self else None for t in inputs)
        tensor = Tensor(value, tape=self, index=len(self))
        self._parents.append(parents)
        self._vjps.append(vjp)
        self._shapes.append(tensor.shape)

        return tensor

    def backward(self, output, retain_graph=False):
        """ Compute gradients of a scalar output w.r.t. all leaves.

        Parameters
        ----------
        output : Tensor
            A single-element tensor recorded on this tape.

        retain_graph : bool, default False
            Keep the reverse rules so that backward can be called again.
            Otherwise they are released, which frees the intermediate
            values they hold.

        Returns
        -------
        dict
            Mapping from leaf name to gradient array of the leaf's shape.
            Leaves that do not influence the output get zero gradients.
        """
        if output.tape is not self:
            raise ContractViolation("Output is not recorded on this tape")
        if self.released:
            raise ContractViolation("The tape was released by backward")
        if output.size != 1:
            raise ContractViolation(
                f"backward needs a scalar output, got shape {output.shape}"
            )

        leaf_indexes = set(self.leaves.values())
        grads = [None] * len(self)
        grads[output.index] = np.ones(output.shape)

        for idx in range(output.index, -1, -1):
            grad = grads[idx]
            if grad is None or self._vjps[idx] is None:
                continue

            parent_grads = self._vjps[idx](grad)
            for parent, parent_grad in zip(self._parents[idx], parent_grads):
                if parent is None or parent_grad is None:
                    continue
                if grads[parent] is None:
                    grads[parent] = parent_grad
                else:
                    grads[parent] = grads[parent] + parent_grad

            if idx not in leaf_indexes:
                grads[idx] = None

        if not retain_graph:
            self.release()

        return {
            name: np.zeros(self._shapes[idx])
            if grads[idx] is None
            else np.reshape(grads[idx], self._shapes[idx])
            for name, idx in self.leaves.items()
        }

    def release(self):
        """ Drop the reverse rules and the values they reference.

        Backward can no longer be called and nothing can be recorded.
        """
        self._vjps = [None] * len(self._vjps)
        self.released = True


def backward(tape, output, retain_graph=False):
    """ Gradients of a scalar output w.r.t. every leaf of a tape.

    Parameters
    ----------
    tape : Tape
        The tape the output is recorded on.

    output : Tensor
        Single-element output tensor.

    retain_graph : bool, default False
        Keep the reverse rules of the tape.

    Returns
    -------
    dict
        Mapping from leaf name to gradient array.
    """
    return tape.backward(output, retain_graph=retain_graph)


from multitask_link_prediction.numeric import ops  # noqa: E402
