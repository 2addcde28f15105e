#!/usr/bin/env python3
"""Export VGG-16 conv1_1/conv1_2 weights in the archive layout a2f reads.

    export_vgg_conv12.py OUT [--state-dict vgg16.pth]

Without --state-dict the ImageNet weights come from torchvision.
"""
import argparse

import torch


class Conv12(torch.nn.Module):
    def __init__(self, tensors):
        super().__init__()
        for name, value in tensors.items():
            self.register_parameter(name, torch.nn.Parameter(value.detach().clone().float()))

    def forward(self, x):
        return x


def load_features(state_dict_path):
    if state_dict_path:
        sd = torch.load(state_dict_path, map_location="cpu")
    else:
        import torchvision

        sd = torchvision.models.vgg16(weights=torchvision.models.VGG16_Weights.IMAGENET1K_V1).state_dict()
    return {
        "conv1_1_weight": sd["features.0.weight"],
        "conv1_1_bias": sd["features.0.bias"],
        "conv1_2_weight": sd["features.2.weight"],
        "conv1_2_bias": sd["features.2.bias"],
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out")
    parser.add_argument("--state-dict", help="torchvision-style vgg16 state dict (.pth)")
    args = parser.parse_args()
    torch.jit.script(Conv12(load_features(args.state_dict))).save(args.out)


if __name__ == "__main__":
    main()
