import * as tf from '@tensorflow/tfjs'
import fs from 'fs'

// Models travel as a single JSON file: layers topology, weight specs, and
// the weight buffer in base64. Plain @tensorflow/tfjs has no file://
// handler under Node, so save/load go through the in-memory IO handlers.

export interface ModelFile {
  format: 'layers-model'
  modelTopology: unknown
  weightSpecs: tf.io.WeightsManifestEntry[]
  weightsBase64: string
  meta: Record<string, unknown>
}

export async function saveModelJson(
  model: tf.LayersModel,
  path: string,
  meta: Record<string, unknown> = {},
): Promise<void> {
  let captured: tf.io.ModelArtifacts | undefined
  await model.save(
    tf.io.withSaveHandler(async artifacts => {
      captured = artifacts
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } }
    }),
  )
  if (!captured || !captured.weightData) {
    throw new Error('model save produced no weight data')
  }
  const weights = Buffer.from(captured.weightData as ArrayBuffer)
  const file: ModelFile = {
    format: 'layers-model',
    modelTopology: captured.modelTopology,
    weightSpecs: captured.weightSpecs ?? [],
    weightsBase64: weights.toString('base64'),
    meta,
  }
  fs.writeFileSync(path, JSON.stringify(file))
}

export async function loadModelJson(path: string): Promise<{ model: tf.LayersModel; meta: Record<string, unknown> }> {
  if (!fs.existsSync(path)) {
    throw new Error(`model file not found: ${path}`)
  }
  let file: ModelFile
  try {
    file = JSON.parse(fs.readFileSync(path, 'utf8'))
  } catch (err) {
    throw new Error(`model file ${path} is not valid JSON: ${(err as Error).message}`)
  }
  if (file.format !== 'layers-model' || !file.modelTopology || !file.weightsBase64) {
    throw new Error(`model file ${path} is missing topology or weights`)
  }
  const buf = Buffer.from(file.weightsBase64, 'base64')
  const weightData = buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength)
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: file.modelTopology as {},
      weightSpecs: file.weightSpecs,
      weightData,
    }),
  )
  return { model, meta: file.meta ?? {} }
}
