method cube_term(x: int) returns (r: int)
  ensures r == x * x * x - x
{
  r := x * x * x - x;
}
