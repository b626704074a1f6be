"""Regenerate the bundled architecture spec fixtures.

Keras models come from ``tf.keras.applications`` (weights=None); the layer
list is ``model.layers`` in the order Keras stores it (topological order of
the functional graph), minus the InputLayer.  ShuffleNet and ViT are not in
keras.applications, so they are traced with ``torch.fx`` from torchvision and
the node types are mapped onto the Keras layer names.

Not a runtime dependency of the package; run manually:

    python tools/gen_specs.py src/neurnkit/data/specs
"""
import json
import operator
import sys
from collections import Counter
from pathlib import Path

KERAS_RENAME = {
    "MaxPooling2D": "MaxPool",
    "AveragePooling2D": "AvgPool",
    "GlobalAveragePooling2D": "GlobalAvgPool",
    "GlobalMaxPooling2D": "GlobalMaxPool",
    "ZeroPadding2D": "ZeroPadding2D",
}
ACTIVATION_NAMES = {
    "relu": "ReLU",
    "swish": "Swish",
    "silu": "Swish",
    "sigmoid": "Sigmoid",
    "softmax": "Softmax",
    "relu6": "ReLU6",
    "gelu": "GELU",
    "tanh": "Tanh",
}

KERAS_MODELS = {
    "VGG19": "VGG19",
    "EfficientNetB0": "EfficientNetB0",
    "DenseNet121": "DenseNet121",
    "Xception": "Xception",
    "NASNetMobile": "NASNetMobile",
    "ResNet50": "ResNet50",
    "ResNet50V2": "ResNet50V2",
    "InceptionV3": "InceptionV3",
    "MobileNet": "MobileNet",
    "MobileNetV2": "MobileNetV2",
}
KERAS_EXTRA = {"VGG16": "VGG16", "ResNet101": "ResNet101", "DenseNet169": "DenseNet169"}


def keras_layer_name(layer):
    cls = type(layer).__name__
    if cls == "Activation":
        act = layer.get_config()["activation"]
        if isinstance(act, dict):
            act = act.get("config", {}).get("name", act.get("class_name"))
        return ACTIVATION_NAMES.get(str(act).lower(), str(act))
    if cls == "ReLU":
        cfg = layer.get_config()
        return "ReLU6" if cfg.get("max_value") == 6.0 else "ReLU"
    return KERAS_RENAME.get(cls, cls)


def keras_layers(name):
    import tensorflow as tf

    ctor = getattr(tf.keras.applications, name)
    kwargs = {"weights": None}
    if name == "NASNetMobile":
        kwargs["input_shape"] = (224, 224, 3)
    model = ctor(**kwargs)
    out = []
    for layer in model.layers:
        if type(layer).__name__ == "InputLayer":
            continue
        out.append(keras_layer_name(layer))
    return out


TORCH_MODULES = {
    "Conv2d": "Conv2D",
    "BatchNorm2d": "BatchNormalization",
    "ReLU": "ReLU",
    "MaxPool2d": "MaxPool",
    "Linear": "Dense",
    "LayerNorm": "LayerNormalization",
    "Dropout": "Dropout",
    "GELU": "GELU",
    "MultiheadAttention": "MultiHeadAttention",
}


def torch_layers(model, example):
    import torch
    import torch.fx

    gm = torch.fx.symbolic_trace(model) if not hasattr(model, "_fx") else model
    modules = dict(gm.named_modules())
    out = []
    for node in gm.graph.nodes:
        if node.op == "call_module":
            cls = type(modules[node.target]).__name__
            if cls in TORCH_MODULES:
                out.append(TORCH_MODULES[cls])
            else:
                raise KeyError(f"unmapped module {cls}")
        elif node.op in ("call_function", "call_method"):
            t = node.target
            if t in (torch.cat,):
                out.append("Concatenate")
            elif t in (operator.add, torch.add) or t == "add":
                # skip index arithmetic on shapes
                if all(isinstance(a, torch.fx.Node) for a in node.args):
                    out.append("Add")
            elif t is torch.flatten or t == "flatten":
                out.append("Flatten")
            elif t == "mean":
                out.append("GlobalAvgPool")
            elif t is torch.nn.functional.relu:
                out.append("ReLU")
    return out


def shufflenet():
    import torchvision

    return torch_layers(torchvision.models.shufflenet_v2_x1_0(weights=None), None)


def vit():
    import torch.fx
    import torchvision

    class Tracer(torch.fx.Tracer):
        def is_leaf_module(self, m, qualname):
            if isinstance(m, torch.nn.MultiheadAttention):
                return True
            return super().is_leaf_module(m, qualname)

    model = torchvision.models.vit_b_16(weights=None)
    graph = Tracer().trace(model)
    gm = torch.fx.GraphModule(model, graph)
    gm._fx = True
    layers = torch_layers(gm, None)
    # patch embedding is conv_proj; class token concat, then encoder blocks
    return layers


def main(out_dir, extra_dir=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    specs = {}
    for display, ctor in KERAS_MODELS.items():
        specs[display] = keras_layers(ctor)
    specs["ShuffleNet"] = shufflenet()
    specs["ViT"] = vit()
    for name, layers in specs.items():
        (out / f"{name}.json").write_text(
            json.dumps({"name": name, "layers": layers}, indent=1) + "\n")
        print(name, len(layers), Counter(layers).most_common(4))
    if extra_dir:
        ext = Path(extra_dir)
        ext.mkdir(parents=True, exist_ok=True)
        for display, ctor in KERAS_EXTRA.items():
            layers = keras_layers(ctor)
            (ext / f"{display}.json").write_text(
                json.dumps({"name": display, "layers": layers}, indent=1) + "\n")
            print(display, len(layers))
    kinds = sorted({k for layers in specs.values() for k in layers})
    print(len(kinds), kinds)


if __name__ == "__main__":
    main(*sys.argv[1:])
