from .checkpoints import (
    CheckpointError,
    load_discriminator,
    load_generator,
    save_discriminator,
    save_generator,
)
from .discriminators import (
    DISCRIMINATOR_FAMILIES,
    Discriminator,
    DiscriminatorSpec,
    build_discriminator,
)
from .generators import (
    GENERATOR_FAMILIES,
    Generator,
    GeneratorSpec,
    build_generator,
)
from .losses import (
    ADVERSARIAL_FORMS,
    D_EPS,
    LossConfig,
    as_batch_tensor,
    cycle_consistency_loss,
    discriminator_loss,
    gan_value,
    generator_adversarial_loss,
    identity_regularizer,
    pix2pix_generator_loss,
)

__all__ = [
    "ADVERSARIAL_FORMS",
    "CheckpointError",
    "D_EPS",
    "DISCRIMINATOR_FAMILIES",
    "Discriminator",
    "DiscriminatorSpec",
    "GENERATOR_FAMILIES",
    "Generator",
    "GeneratorSpec",
    "LossConfig",
    "as_batch_tensor",
    "build_discriminator",
    "build_generator",
    "cycle_consistency_loss",
    "discriminator_loss",
    "gan_value",
    "generator_adversarial_loss",
    "identity_regularizer",
    "load_discriminator",
    "load_generator",
    "pix2pix_generator_loss",
    "save_discriminator",
    "save_generator",
]
