import * as tf from '@tensorflow/tfjs'
import fs from 'fs'
import path from 'path'
import { loadSplit } from '../src/datasets'
import { saveModelJson } from '../src/model'

// Builds the "pretrained" classifier fixtures the tests export from:
// a small CNN and a small MLP, both trained on the stripes train split,
// both ending in a linear layer so they output logits. Training is not
// part of the exporter itself; this script only manufactures realistic
// model files.

function buildCnn(h: number, w: number, classes: number): tf.LayersModel {
  const model = tf.sequential()
  model.add(
    tf.layers.conv2d({
      inputShape: [h, w, 1],
      filters: 8,
      kernelSize: 3,
      activation: 'relu',
    }),
  )
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }))
  model.add(tf.layers.conv2d({ filters: 16, kernelSize: 3, activation: 'relu' }))
  model.add(tf.layers.flatten())
  model.add(tf.layers.dense({ units: classes, activation: 'linear' }))
  return model
}

function buildMlp(h: number, w: number, classes: number): tf.LayersModel {
  const model = tf.sequential()
  model.add(tf.layers.flatten({ inputShape: [h, w, 1] }))
  model.add(tf.layers.dense({ units: 32, activation: 'relu' }))
  model.add(tf.layers.dense({ units: classes, activation: 'linear' }))
  return model
}

async function trainAndSave(
  name: string,
  model: tf.LayersModel,
  outPath: string,
  dataset: string,
  epochs: number,
): Promise<void> {
  const split = loadSplit(dataset, 'train')
  const { n, height: h, width: w, classes } = split
  const x = tf.tensor4d(split.images, [n, h, w, 1])
  const y = tf.oneHot(tf.tensor1d(split.labels, 'int32'), classes).toFloat()
  model.compile({
    optimizer: tf.train.adam(0.005),
    loss: (labels, logits) => tf.losses.softmaxCrossEntropy(labels, logits),
  })
  await model.fit(x, y, { epochs, batchSize: 32, shuffle: true, verbose: 0 })

  const pred = tf.tidy(() => (model.predict(x) as tf.Tensor).argMax(-1).dataSync())
  let hits = 0
  for (let i = 0; i < n; ++i) {
    if (pred[i] === split.labels[i]) ++hits
  }
  const accuracy = hits / n
  console.log(`${name}: train accuracy ${(100 * accuracy).toFixed(1)}%`)

  await saveModelJson(model, outPath, { name, dataset, classes, accuracy })
  x.dispose()
  y.dispose()
  model.dispose()
}

export const FIXTURE_DATASET = 'stripes'
export const FIXTURE_MODELS = ['cnn', 'mlp'] as const

/** Train both fixture models into dir unless the files are already there. */
export async function pretrainFixtures(dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true })
  const missing = FIXTURE_MODELS.filter(m => !fs.existsSync(path.join(dir, `${m}.json`)))
  if (missing.length === 0) {
    return
  }
  const spec = loadSplit(FIXTURE_DATASET, 'train')
  for (const name of missing) {
    const model =
      name === 'cnn'
        ? buildCnn(spec.height, spec.width, spec.classes)
        : buildMlp(spec.height, spec.width, spec.classes)
    const epochs = name === 'cnn' ? 4 : 8
    await trainAndSave(name, model, path.join(dir, `${name}.json`), FIXTURE_DATASET, epochs)
  }
}
