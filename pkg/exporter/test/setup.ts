import path from 'path'
import { pretrainFixtures } from '../scripts/pretrain'

export const FIXTURES_DIR = path.join(__dirname, 'fixtures')

export default async function setup() {
  await pretrainFixtures(FIXTURES_DIR)
}
