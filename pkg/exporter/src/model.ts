// Checkpoint zoo.  Weights are seeded so an export is reproducible without
// shipping weight files; every head is linear because the consumer wants raw
// logits (it applies its own temperature-scaled activation downstream).

import * as tf from '@tensorflow/tfjs'

export const NUM_CLASSES = 10
export const INPUT_SHAPE: [number, number, number] = [16, 16, 1]

function tinyCnn(seed: number): tf.LayersModel {
  const model = tf.sequential()
  model.add(
    tf.layers.conv2d({
      inputShape: INPUT_SHAPE,
      filters: 8,
      kernelSize: 3,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
    }),
  )
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }))
  model.add(
    tf.layers.conv2d({
      filters: 16,
      kernelSize: 3,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
    }),
  )
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }))
  model.add(tf.layers.flatten())
  model.add(
    tf.layers.dense({
      units: 32,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 2 }),
    }),
  )
  model.add(
    tf.layers.dense({
      units: NUM_CLASSES,
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 3 }),
    }),
  )
  return model
}

function tinyMlp(seed: number): tf.LayersModel {
  const model = tf.sequential()
  model.add(tf.layers.flatten({ inputShape: INPUT_SHAPE }))
  model.add(
    tf.layers.dense({
      units: 32,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
    }),
  )
  model.add(
    tf.layers.dense({
      units: NUM_CLASSES,
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
    }),
  )
  return model
}

const ZOO: Record<string, (seed: number) => tf.LayersModel> = {
  tiny_cnn: tinyCnn,
  tiny_mlp: tinyMlp,
}

export function buildModel(id: string, seed: number): tf.LayersModel {
  const build = ZOO[id]
  if (!build) {
    throw new Error(`unknown model '${id}' (have: ${Object.keys(ZOO).join(', ')})`)
  }
  const model = build(seed)
  assertRawLogitHead(model)
  return model
}

/**
 * The interchange format carries pre-activation logits; refuse a checkpoint
 * whose head already applies softmax, because exporting probabilities would
 * silently change every downstream margin.
 */
export function assertRawLogitHead(model: tf.LayersModel): void {
  const last = model.layers[model.layers.length - 1]
  const config = last.getConfig() as { activation?: string }
  if (config.activation && config.activation === 'softmax') {
    throw new Error(
      `model head '${last.name}' applies softmax; export needs raw logits ` +
        '(rebuild the checkpoint with a linear head)',
    )
  }
}
